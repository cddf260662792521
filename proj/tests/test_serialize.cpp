#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <string>

#include <bandex/serialize.hpp>

#include "test_support.hpp"

using namespace bandex;

namespace
{

// Through text, so exactness covers the writer and the parser.
Json reparse(const Json& j)
{
    return Json::parse(j.dump());
}

} // namespace

TEST(Json, ComplexAndVectorRoundTrip)
{
    const Complex z(0.1, -1.0 / 3.0);
    EXPECT_EQ(complex_from_json(reparse(complex_to_json(z))), z);
    Rng rng(91);
    const CVector v = bandex::testing::random_cvector(17, rng);
    EXPECT_EQ(cvector_from_json(reparse(cvector_to_json(v))), v);
    EXPECT_THROW(complex_from_json(Json::array({1.0})), std::invalid_argument);
    EXPECT_THROW(cvector_from_json(Json::object()), std::invalid_argument);
}

TEST(Json, SignalAndSceneRoundTrip)
{
    Rng rng(92);
    const GridSpec g{8, 25.0};
    EXPECT_EQ(grid_from_json(reparse(to_json(g))), g);

    const SparseSignal x = make_objects(4, 30.0, 2.0, g, rng);
    const Json jx = reparse(to_json(x, 1234u));
    EXPECT_EQ(jx.at("seed").get<std::uint64_t>(), 1234u);
    const SparseSignal y = signal_from_json(jx);
    EXPECT_EQ(y.support, x.support);
    EXPECT_EQ(y.amplitudes, x.amplitudes);
    EXPECT_EQ(y.grid, x.grid);

    const OffGridScene s = make_offgrid_scene(3, 5.0, 2.0, 20.0, rng);
    const OffGridScene t = scene_from_json(reparse(to_json(s)));
    EXPECT_EQ(t.frequencies, s.frequencies);
    EXPECT_EQ(t.amplitudes, s.amplitudes);
    EXPECT_EQ(t.span, s.span);

    Json broken = to_json(x);
    broken["support"] = Json::array({5, 5, 6, 7});
    EXPECT_THROW(signal_from_json(broken), std::invalid_argument);
}

TEST(Json, MatrixRoundTripWithAndWithoutEntries)
{
    Rng rng(93);
    const SensingMatrix S = spectral_matrix(12, GridSpec{3, 6.0}, rng);
    const SensingMatrix full = matrix_from_json(reparse(to_json(S, true)));
    EXPECT_EQ(full.matrix, S.matrix);
    EXPECT_EQ(full.times, S.times);
    EXPECT_TRUE(full.shift_invariant);

    // Without entries the matrix is rebuilt from the sample times.
    const SensingMatrix rebuilt = matrix_from_json(reparse(to_json(S, false)));
    EXPECT_LT((rebuilt.matrix - S.matrix).cwiseAbs().maxCoeff(), 1e-15);

    Json bare = to_json(S);
    bare["times"] = Json::array();
    EXPECT_THROW(matrix_from_json(bare), std::invalid_argument);
}

TEST(Json, RecoveryResultRoundTrip)
{
    Rng rng(94);
    const SensingMatrix S = spectral_matrix(20, GridSpec{4, 10.0}, rng);
    const CVector b = S.matrix.col(3) + S.matrix.col(25);
    RecoveryResult r = fit_on_support(S.matrix, b, IndexSet{3, 25}, S.grid);
    r.residual_norm_history = {1.0, 0.5, std::numeric_limits<double>::infinity()};
    r.iterations = 2;
    r.termination = Termination::residual_below_eps;
    r.trace = {{3, {}}, {25, {3}}};
    const RecoveryResult back = result_from_json(reparse(to_json(r)));
    EXPECT_EQ(back.estimate.support, r.estimate.support);
    EXPECT_EQ(back.estimate.amplitudes, r.estimate.amplitudes);
    EXPECT_EQ(back.residual_norm_history.size(), 3u);
    EXPECT_TRUE(std::isinf(back.residual_norm_history[2]));
    EXPECT_EQ(back.iterations, 2);
    EXPECT_EQ(back.termination, Termination::residual_below_eps);
    ASSERT_EQ(back.trace.size(), 2u);
    EXPECT_EQ(back.trace[1].pick, 25);

    Json bad = to_json(r);
    bad["termination"] = "gave_up";
    EXPECT_THROW(result_from_json(bad), std::invalid_argument);
}

TEST(FormatDouble, SeventeenDigitsRoundTrip)
{
    Rng rng(95);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int k = 0; k < 200; ++k) {
        const double v = u(rng) * std::pow(10.0, k % 30 - 15);
        EXPECT_EQ(std::stod(format_double(v)), v);
    }
    EXPECT_EQ(format_double(0.1), "0.10000000000000001");
    EXPECT_EQ(format_double(std::nan("")), "nan");
    EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
    EXPECT_EQ(format_double(-std::numeric_limits<double>::infinity()), "-inf");
}

TEST(Fnv1a, KnownValues)
{
    EXPECT_EQ(fnv1a("", 0), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a("a", 1), 0xaf63dc4c8601ec8cULL);
    EXPECT_EQ(fnv1a("foobar", 6), 0x85944171f73967e8ULL);
}

TEST(InstanceHash, SensitiveToMatrixAndData)
{
    Rng rng(96);
    const SensingMatrix S = spectral_matrix(10, GridSpec{2, 5.0}, rng);
    CVector b = S.matrix.col(1);
    const std::uint64_t h = instance_hash(S.matrix, b);
    EXPECT_EQ(instance_hash(S.matrix, b), h);
    b(0) += 1e-15;
    EXPECT_NE(instance_hash(S.matrix, b), h);
    CMatrix A = S.matrix;
    A(3, 4) = std::conj(A(3, 4));
    EXPECT_NE(instance_hash(A, S.matrix.col(1)), h);
}
