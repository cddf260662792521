#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include <bandex/metrics.hpp>

#include "test_support.hpp"

using namespace bandex;

namespace
{

RecoveryResult result_on(const IndexSet& support, const GridSpec& grid, const CVector& amps)
{
    RecoveryResult r;
    r.estimate.support = support;
    r.estimate.amplitudes = amps;
    r.estimate.grid = grid;
    return r;
}

SparseSignal truth_on(const IndexSet& support, const GridSpec& grid)
{
    SparseSignal x;
    x.support = support;
    x.amplitudes = CVector::Ones(static_cast<Index>(support.size()));
    x.grid = grid;
    return x;
}

} // namespace

TEST(Bottleneck, SortedPairing)
{
    EXPECT_DOUBLE_EQ(bottleneck_1d({0.0, 5.0, 9.0}, {9.5, 0.25, 5.0}), 0.5);
    EXPECT_DOUBLE_EQ(bottleneck_1d({}, {}), 0.0);
    EXPECT_DOUBLE_EQ(bottleneck_1d({1.0, 2.0}, {2.0, 1.0}), 0.0);
    EXPECT_THROW(bottleneck_1d({1.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST(Bottleneck, HausdorffNeverExceedsIt)
{
    Rng rng(81);
    std::uniform_real_distribution<double> u(0.0, 50.0);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> a(5), b(5);
        for (double& v : a) v = u(rng);
        for (double& v : b) v = u(rng);
        EXPECT_LE(hausdorff_1d(a, b), bottleneck_1d(a, b) + 1e-15);
    }
    EXPECT_DOUBLE_EQ(hausdorff_1d({0.0, 10.0}, {1.0}), 9.0);
    EXPECT_THROW(hausdorff_1d({}, {1.0}), std::invalid_argument);
}

TEST(ScoreTrial, PerfectRecovery)
{
    Rng rng(82);
    const SensingMatrix S = spectral_matrix(40, GridSpec{10, 50.0}, rng);
    const SparseSignal x = truth_on({20, 200, 400}, S.grid);
    const CVector b = S.matrix * x.dense();
    const RecoveryResult r = fit_on_support(S.matrix, b, x.support, S.grid);
    const TrialOutcome o = score_trial(x, r, b);
    EXPECT_TRUE(o.success);
    EXPECT_DOUBLE_EQ(o.bottleneck_rl, 0.0);
    EXPECT_LT(o.rel_residual, 1e-12);
    EXPECT_LT(o.rel_coeff_error, 1e-12);
}

TEST(ScoreTrial, SuccessRadiusIsOneRayleighLength)
{
    const GridSpec g{10, 50.0};
    const SparseSignal x = truth_on({100, 300}, g);
    const CVector b = CVector::Ones(4);
    const CVector amps = CVector::Ones(2);

    const TrialOutcome near = score_trial(x, result_on({109, 300}, g, amps), b);
    EXPECT_TRUE(near.success);
    EXPECT_NEAR(near.bottleneck_rl, 0.9, 1e-12);

    const TrialOutcome far = score_trial(x, result_on({112, 300}, g, amps), b);
    EXPECT_FALSE(far.success);
    EXPECT_NEAR(far.bottleneck_rl, 1.2, 1e-12);

    const TrialOutcome exact_one = score_trial(x, result_on({110, 300}, g, amps), b);
    EXPECT_FALSE(exact_one.success);
}

TEST(ScoreTrial, CardinalityMismatchFails)
{
    const GridSpec g{10, 50.0};
    const SparseSignal x = truth_on({100, 300}, g);
    const TrialOutcome o =
        score_trial(x, result_on({100}, g, CVector::Ones(1)), CVector::Ones(3));
    EXPECT_FALSE(o.success);
    EXPECT_TRUE(std::isinf(o.bottleneck_rl));
}

TEST(RelativeError, Definition)
{
    CVector ref(2), x(2);
    ref << 3.0, Complex(0, 4);
    x << 3.0, Complex(0, 3);
    EXPECT_DOUBLE_EQ(relative_error(x, ref), 0.2);
    EXPECT_DOUBLE_EQ(relative_error(x, CVector::Zero(2)), x.norm());
}

TEST(BandMatching, CountsDistinctBandPairs)
{
    const GridSpec g{4, 10.0};
    const BandIndex bands = build_band_index(CMatrix::Identity(40, 40), g, FixedRadius{2.0, 1.0});
    // Band half-width is 4 grid steps.
    EXPECT_EQ(band_matching_size({10, 30}, {12, 27}, bands), 2);
    EXPECT_EQ(band_matching_size({10, 12}, {11, 30}, bands), 1);
    EXPECT_EQ(band_matching_size({9, 14}, {11, 13}, bands), 2);
    EXPECT_EQ(band_matching_size({}, {11}, bands), 0);
}
