#include <gtest/gtest.h>

#include <cmath>

#include <bandex/models.hpp>

#include "test_support.hpp"

using namespace bandex;
using bandex::testing::random_cvector;

namespace
{
const double pi = std::acos(-1.0);
}

TEST(GridSpec, ColumnsAndNearest)
{
    const GridSpec g{20, 200.0};
    EXPECT_EQ(g.columns(), 4000);
    EXPECT_DOUBLE_EQ(g.position(30), 1.5);
    EXPECT_EQ(g.nearest(1.52), 30);
    EXPECT_EQ(g.nearest(-3.0), 0);
    EXPECT_EQ(g.nearest(1e6), 3999);
    EXPECT_EQ(g.steps(0.3), 6);
    EXPECT_THROW((GridSpec{3, 0.5}.columns()), std::invalid_argument);
    EXPECT_THROW((GridSpec{0, 10.0}.columns()), std::invalid_argument);
}

TEST(SpectralMatrix, EntriesFollowTheSampleTimes)
{
    RVector t(3);
    t << 0.1, 0.5, 0.93;
    const GridSpec g{4, 2.5};
    const SensingMatrix S = spectral_matrix_from_times(t, g);
    ASSERT_EQ(S.matrix.rows(), 3);
    ASSERT_EQ(S.matrix.cols(), 10);
    EXPECT_TRUE(S.shift_invariant);
    for (Index k = 0; k < 3; ++k) {
        for (Index l = 0; l < 10; ++l) {
            const Complex want = std::polar(1.0 / std::sqrt(3.0), -2.0 * pi * (l / 4.0) * t(k));
            EXPECT_NEAR(std::abs(S.matrix(k, l) - want), 0.0, 1e-14);
        }
    }
}

TEST(SpectralMatrix, UnitColumnsAndToeplitzGram)
{
    Rng rng(11);
    const SensingMatrix S = spectral_matrix(30, GridSpec{5, 4.0}, rng);
    const CMatrix G = S.matrix.adjoint() * S.matrix;
    for (Index j = 0; j < G.cols(); ++j) {
        EXPECT_NEAR(G(j, j).real(), 1.0, 1e-13);
    }
    for (Index i = 1; i < G.rows(); ++i) {
        for (Index j = 1; j < G.cols(); ++j) {
            EXPECT_NEAR(std::abs(G(i, j) - G(i - 1, j - 1)), 0.0, 1e-13);
        }
    }
    for (Index k = 0; k < S.times.size(); ++k) {
        EXPECT_GT(S.times(k), 0.0);
        EXPECT_LT(S.times(k), 1.0);
    }
}

TEST(SpectralOperator, MatchesDenseProducts)
{
    Rng rng(12);
    // M = 41 is not a multiple of F, exercising the padded tail block.
    for (const GridSpec g : {GridSpec{4, 10.25}, GridSpec{20, 10.0}, GridSpec{1, 7.0}}) {
        const SensingMatrix S = spectral_matrix(13, g, rng);
        const SpectralOperator op(S);
        const CVector x = random_cvector(S.matrix.cols(), rng);
        const CVector y = random_cvector(13, rng);
        EXPECT_LT((op.apply(x) - S.matrix * x).norm(), 1e-12 * x.norm());
        EXPECT_LT((op.adjoint(y) - S.matrix.adjoint() * y).norm(), 1e-12 * y.norm());
        EXPECT_LT((op.outer_gram() - S.matrix * S.matrix.adjoint()).norm(), 1e-12);
        EXPECT_THROW(op.apply(y), std::invalid_argument);
    }
    SensingMatrix bare;
    bare.matrix = CMatrix::Identity(3, 3);
    EXPECT_THROW(SpectralOperator{bare}, std::invalid_argument);
}

TEST(FrameModel, TightFrameAndRealPhi)
{
    Rng rng(13);
    const FrameModel fm = frame_model(10, 8, 3, 0.5, rng);
    ASSERT_EQ(fm.psi.rows(), 8);
    ASSERT_EQ(fm.psi.cols(), 24);
    const CMatrix PPh = fm.psi * fm.psi.adjoint();
    EXPECT_LT((PPh - 3.0 * CMatrix::Identity(8, 8)).norm(), 1e-12);
    EXPECT_LT(fm.phi.imag().norm(), 1e-15);
    EXPECT_LT((fm.A - fm.phi * fm.psi).norm(), 1e-12);
    EXPECT_NEAR(std::abs(fm.psi(1, 2) - std::polar(1.0 / std::sqrt(8.0), -2.0 * pi * 2 / 24.0)),
                0.0, 1e-14);
}

TEST(MakeObjects, SeparationAndDynamicRange)
{
    const GridSpec g{20, 200.0};
    for (int t = 0; t < 50; ++t) {
        Rng rng(100 + t);
        const SparseSignal x = make_objects(10, 1e4, 3.0, g, rng);
        x.validate();
        ASSERT_EQ(x.sparsity(), 10);
        EXPECT_NEAR(x.dynamic_range(), 1e4, 1e-6);
        const auto p = x.positions();
        for (std::size_t k = 1; k < p.size(); ++k) {
            EXPECT_GE(p[k] - p[k - 1], 3.0 - 1e-12);
        }
    }
    Rng rng(1);
    EXPECT_THROW(make_objects(10, 1.0, 30.0, g, rng), std::invalid_argument);
    EXPECT_THROW(make_objects(10, 0.5, 3.0, g, rng), std::invalid_argument);
}

TEST(MakeObjects, SameSeedSameSignal)
{
    Rng a(5), b(5);
    const SparseSignal x = make_objects(4, 10.0, 2.0, GridSpec{4, 50.0}, a);
    const SparseSignal y = make_objects(4, 10.0, 2.0, GridSpec{4, 50.0}, b);
    EXPECT_EQ(x.support, y.support);
    EXPECT_EQ(x.amplitudes, y.amplitudes);
}

TEST(MakeConsecutiveObjects, EqualSpacing)
{
    Rng rng(21);
    const GridSpec g{20, 200.0};
    const SparseSignal x = make_consecutive_objects(10, 1.2, 1.0, g, rng);
    ASSERT_EQ(x.sparsity(), 10);
    for (std::size_t k = 1; k < x.support.size(); ++k) {
        EXPECT_EQ(x.support[k] - x.support[k - 1], 24);
    }
    EXPECT_THROW(make_consecutive_objects(10, 0.05, 1.0, g, rng), std::invalid_argument);
    EXPECT_THROW(make_consecutive_objects(10, 30.0, 1.0, g, rng), std::invalid_argument);
}

TEST(OffGridScene, StaysInsideWindow)
{
    Rng rng(22);
    const OffGridScene s = make_offgrid_scene(10, 10.0, 3.0, 100.0, rng);
    ASSERT_EQ(s.frequencies.size(), 10u);
    EXPECT_GE(s.frequencies.front(), 0.5);
    EXPECT_LE(s.frequencies.back(), 99.5);
    for (std::size_t k = 1; k < 10; ++k) {
        EXPECT_GE(s.frequencies[k] - s.frequencies[k - 1], 3.0 - 1e-12);
    }
    EXPECT_NEAR(s.dynamic_range(), 10.0, 1e-9);
}

TEST(RelativeNoise, NormAndSigma)
{
    Rng rng(23);
    const CVector clean = random_cvector(50, rng);
    const NoiseDraw n = relative_noise(clean, 0.05, rng);
    EXPECT_NEAR(n.noise.norm(), 0.05 * clean.norm(), 1e-12);
    EXPECT_NEAR(n.sigma, n.noise.norm() / std::sqrt(50.0), 1e-12);
    EXPECT_EQ(relative_noise(clean, 0.0, rng).noise.norm(), 0.0);
    EXPECT_THROW(relative_noise(clean, -1.0, rng), std::invalid_argument);
}

TEST(SynthesizeData, ErrorDecomposition)
{
    Rng rng(24);
    const GridSpec g{5, 60.0};
    const SensingMatrix S = spectral_matrix(40, g, rng);
    const OffGridScene scene = make_offgrid_scene(4, 2.0, 3.0, 60.0, rng);
    const SynthesizedData d = synthesize_data(scene, S.times, g, 0.1, rng);

    const CVector on_grid = S.matrix * d.x_nearest.dense();
    EXPECT_LT((d.b - d.clean - d.noise).norm(), 1e-12);
    EXPECT_LT((d.gridding_error - (d.b - d.noise - on_grid)).norm(), 1e-12);
    EXPECT_LT((d.total_error - d.gridding_error - d.noise).norm(), 1e-12);
    for (std::size_t j = 0; j < scene.frequencies.size(); ++j) {
        EXPECT_LE(std::abs(g.position(d.x_nearest.support[j]) - scene.frequencies[j]),
                  0.5 / g.refinement + 1e-12);
    }
}

TEST(SparseSignal, ValidateRejectsBrokenInvariants)
{
    const GridSpec g{1, 5.0};
    CVector a(2);
    a << Complex(1, 0), Complex(0, 0);
    EXPECT_THROW(bandex::testing::signal_on(g, {1, 3}, a).validate(), std::invalid_argument);
    a(1) = 2.0;
    EXPECT_THROW(bandex::testing::signal_on(g, {3, 1}, a).validate(), std::invalid_argument);
    EXPECT_THROW(bandex::testing::signal_on(g, {1, 5}, a).validate(), std::invalid_argument);
    EXPECT_NO_THROW(bandex::testing::signal_on(g, {1, 4}, a).validate());
}
