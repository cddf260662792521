#include <gtest/gtest.h>

#include <bandex/greedy.hpp>
#include <bandex/metrics.hpp>

#include "test_support.hpp"

using namespace bandex;
using bandex::testing::gaussian_matrix;
using bandex::testing::random_cvector;

namespace
{

struct SpectralCase
{
    SensingMatrix S;
    SparseSignal x;
    CVector b;
    BandIndex bands;
};

SpectralCase spectral_case(std::uint64_t seed, double dr, double noise = 0.0)
{
    Rng rng(seed);
    SpectralCase c;
    c.S = spectral_matrix(100, GridSpec{20, 200.0}, rng);
    c.x = make_objects(10, dr, 3.0, c.S.grid, rng);
    const CVector clean = c.S.matrix * c.x.dense();
    c.b = clean + relative_noise(clean, noise, rng).noise;
    c.bands = build_band_index(c.S, FixedRadius{2.0, 1.0});
    return c;
}

} // namespace

TEST(Omp, ExactOnIncoherentMatrix)
{
    Rng rng(41);
    const CMatrix A = gaussian_matrix(60, 120, rng);
    const IndexSet S = {4, 50, 77, 101};
    CVector c(4);
    c << Complex(1, 0), Complex(-2, 1), Complex(0, 1.5), Complex(0.7, -0.7);
    const CVector b = gather_columns(A, S) * c;
    const RecoveryResult r = omp(A, b, 4);
    EXPECT_EQ(r.estimate.support, S);
    EXPECT_LT((r.estimate.amplitudes - c).norm(), 1e-10);
    EXPECT_LT(r.residual.norm(), 1e-10);
}

TEST(Omp, ResidualOrthogonalAndHistoryDecreasing)
{
    Rng rng(42);
    const CMatrix A = gaussian_matrix(30, 80, rng);
    const CVector b = random_cvector(30, rng);
    const RecoveryResult r = omp(A, b, 6);
    ASSERT_EQ(r.estimate.support.size(), 6u);
    EXPECT_LT((gather_columns(A, r.estimate.support).adjoint() * r.residual).norm(), 1e-10);
    for (std::size_t k = 1; k < r.residual_norm_history.size(); ++k) {
        EXPECT_LE(r.residual_norm_history[k], r.residual_norm_history[k - 1] + 1e-12);
    }
    ASSERT_EQ(r.trace.size(), 6u);
    for (std::size_t k = 0; k < 6; ++k) {
        EXPECT_EQ(r.trace[k].selected_before.size(), k);
    }
}

TEST(Omp, StopsEarlyOnExactFit)
{
    Rng rng(43);
    const CMatrix A = gaussian_matrix(20, 40, rng);
    const CVector b = A.col(7) * 3.0;
    const RecoveryResult r = omp(A, b, 5);
    EXPECT_EQ(r.estimate.support, IndexSet{7});
    EXPECT_EQ(r.termination, Termination::residual_below_eps);
}

TEST(Omp, TiesGoToLowerIndex)
{
    CMatrix A = CMatrix::Identity(3, 3);
    CVector b(3);
    b << Complex(1, 0), Complex(0, 1), Complex(0, 0);
    EXPECT_EQ(omp(A, b, 1).estimate.support, IndexSet{0});
    EXPECT_THROW(omp(A, b, 4), std::invalid_argument);
}

TEST(Bomp, PicksRespectExclusionZone)
{
    const SpectralCase c = spectral_case(44, 1.0);
    const RecoveryResult r = bomp(c.S.matrix, c.b, 10, c.bands);
    for (std::size_t i = 0; i < r.trace.size(); ++i) {
        const IndexSet zone = c.bands.exclusion_zone(r.trace[i].selected_before);
        EXPECT_FALSE(std::binary_search(zone.begin(), zone.end(), r.trace[i].pick));
    }
    EXPECT_TRUE(score_trial(c.x, r, c.b).success);
}

TEST(LocalOptimization, NeverWorsensResidualAndStaysInBand)
{
    const SpectralCase c = spectral_case(45, 10.0, 0.02);
    Rng rng(46);
    IndexSet start;
    for (Index J : c.x.support) {
        start.push_back(std::min<Index>(J + 15, c.bands.columns() - 1));
    }
    const IndexSet out = local_optimization(c.S.matrix, c.b, start, c.bands);
    ASSERT_EQ(out.size(), start.size());
    const double before = restricted_least_squares(c.S.matrix, c.b, start).residual.norm();
    const double after = restricted_least_squares(c.S.matrix, c.b, out).residual.norm();
    EXPECT_LE(after, before + 1e-12);
    for (std::size_t k = 0; k < out.size(); ++k) {
        const auto band = c.bands.band(start[k]);
        EXPECT_TRUE(std::binary_search(band.begin(), band.end(), out[k]));
    }
}

TEST(LocalOptimization, FixedPointAtTruth)
{
    const SpectralCase c = spectral_case(47, 1.0);
    EXPECT_EQ(local_optimization(c.S.matrix, c.b, c.x.support, c.bands), c.x.support);
}

TEST(Bloomp, RecoversSeparatedObjectsAcrossDynamicRange)
{
    for (double dr : {1.0, 100.0, 1e6}) {
        const SpectralCase c = spectral_case(48, dr);
        const RecoveryResult r = bloomp(c.S.matrix, c.b, 10, c.bands);
        const TrialOutcome o = score_trial(c.x, r, c.b);
        EXPECT_TRUE(o.success) << "dr=" << dr;
        EXPECT_LT(o.rel_residual, 1e-8) << "dr=" << dr;
    }
}

TEST(Loomp, RecoversWithoutBandExclusion)
{
    const SpectralCase c = spectral_case(49, 1.0);
    const RecoveryResult r = loomp(c.S.matrix, c.b, 10, c.bands);
    EXPECT_TRUE(score_trial(c.x, r, c.b).success);
}

TEST(Pursuit, RejectsMismatchedBands)
{
    const SpectralCase c = spectral_case(50, 1.0);
    const BandIndex other =
        build_band_index(CMatrix::Identity(5, 5), GridSpec{1, 5.0}, FixedRadius{});
    EXPECT_THROW(bomp(c.S.matrix, c.b, 3, other), std::invalid_argument);
    EXPECT_THROW(local_optimization(c.S.matrix, c.b, IndexSet{1}, other),
                 std::invalid_argument);
}
