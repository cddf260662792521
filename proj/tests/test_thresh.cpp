#include <gtest/gtest.h>

#include <bandex/metrics.hpp>
#include <bandex/thresh.hpp>

#include "test_support.hpp"

using namespace bandex;
using bandex::testing::gaussian_matrix;

namespace
{

struct Case
{
    SensingMatrix S;
    SparseSignal x;
    CVector b;
    BandIndex bands;
};

Case spectral_case(std::uint64_t seed, double dr)
{
    Rng rng(seed);
    Case c;
    c.S = spectral_matrix(100, GridSpec{20, 200.0}, rng);
    c.x = make_objects(10, dr, 3.0, c.S.grid, rng);
    c.b = c.S.matrix * c.x.dense();
    c.bands = build_band_index(c.S, FixedRadius{2.0, 1.0});
    return c;
}

} // namespace

TEST(BandExcludedSelect, DescendingWithTiesToLowerIndex)
{
    RVector mag(6);
    mag << 0.5, 3.0, 0.0, 3.0, 1.0, 2.0;
    std::vector<SelectionStep> trace;
    const IndexSet picks = band_excluded_select(mag, 4, nullptr, &trace);
    EXPECT_EQ(picks, (IndexSet{1, 3, 5, 4}));
    ASSERT_EQ(trace.size(), 4u);
    EXPECT_EQ(trace[2].selected_before, (IndexSet{1, 3}));
    // Zero entries are never picked.
    EXPECT_EQ(band_excluded_select(mag, 10, nullptr).size(), 5u);
}

TEST(BandExcludedSelect, HonoursExclusion)
{
    const GridSpec g{1, 10.0};
    const BandIndex bands = build_band_index(CMatrix::Identity(10, 10), g, FixedRadius{2.0, 1.0});
    RVector mag(10);
    mag << 1, 2, 9, 8, 7, 1, 1, 6, 1, 1;
    // 2 bars 0..4; next best admissible is 7, which bars 5..9.
    EXPECT_EQ(band_excluded_select(mag, 5, &bands), (IndexSet{2, 7}));
}

TEST(Bmt, OrthonormalMatrixKeepsLargest)
{
    const CMatrix A = CMatrix::Identity(8, 8);
    CVector b(8);
    b << 0.1, 5, 0, 0, -3, 0, 0.2, 0;
    const BandIndex bands = build_band_index(A, GridSpec{1, 8.0}, FixedRadius{0.5, 0.5});
    const RecoveryResult r = bmt(A, b, 2, bands);
    EXPECT_EQ(r.estimate.support, (IndexSet{1, 4}));
    EXPECT_EQ(r.termination, Termination::sparsity_reached);
}

TEST(Blot, ReturnsTruthFromTruth)
{
    const Case c = spectral_case(51, 10.0);
    const SparseSignal est = blot(c.x.dense(), c.S.matrix, c.b, 10, c.bands);
    EXPECT_EQ(est.support, c.x.support);
    EXPECT_LT((est.amplitudes - c.x.amplitudes).norm(), 1e-9 * c.x.amplitudes.norm());
}

TEST(Blot, LocalOptimisationRepairsShiftedPeaks)
{
    const Case c = spectral_case(52, 1.0);
    CVector shifted = CVector::Zero(c.x.grid.columns());
    for (Index k = 0; k < c.x.sparsity(); ++k) {
        shifted(c.x.support[static_cast<std::size_t>(k)] + 3) = c.x.amplitudes(k);
    }
    const RecoveryResult r = blot_fit(shifted, c.S.matrix, c.b, 10, c.bands);
    // One coordinate-wise sweep: every pick lands strictly closer than the
    // 3-step shift, not necessarily on the truth.
    const TrialOutcome o = score_trial(c.x, r, c.b);
    EXPECT_TRUE(o.success);
    EXPECT_LT(o.bottleneck_rl, 3.0 / c.S.grid.refinement);
}

TEST(SubspacePursuit, PlainVariantsOnIncoherentMatrix)
{
    Rng rng(53);
    const CMatrix A = gaussian_matrix(80, 200, rng);
    const IndexSet S = {3, 40, 41, 150, 199};
    CVector c(5);
    c << 1, -1, Complex(0, 2), 0.5, Complex(1, 1);
    const CVector b = gather_columns(A, S) * c;
    for (const RecoveryResult& r : {sp(A, b, 5), cosamp(A, b, 5)}) {
        EXPECT_EQ(r.estimate.support, S);
        EXPECT_EQ(r.termination, Termination::residual_below_eps);
        for (std::size_t k = 1; k < r.residual_norm_history.size(); ++k) {
            EXPECT_LT(r.residual_norm_history[k], r.residual_norm_history[k - 1]);
        }
    }
}

TEST(SubspacePursuit, BandExcludedVariantsOnCoherentMatrix)
{
    const Case c = spectral_case(54, 1.0);
    const std::vector<std::pair<std::string, RecoveryResult>> runs = {
        {"blosp", blosp(c.S.matrix, c.b, 10, c.bands)},
        {"blocosamp", blocosamp(c.S.matrix, c.b, 10, c.bands)},
        {"bloiht", bloiht(c.S.matrix, c.b, 10, c.bands)},
        {"bsp", be_only_variant(c.S.matrix, c.b, 10, c.bands, BandExcludedKind::bsp)},
        {"bcosamp", be_only_variant(c.S.matrix, c.b, 10, c.bands, BandExcludedKind::bcosamp)},
    };
    for (const auto& [name, r] : runs) {
        const TrialOutcome o = score_trial(c.x, r, c.b);
        EXPECT_TRUE(o.success) << name;
        EXPECT_LE(r.estimate.support.size(), 10u) << name;
    }
}

TEST(Bniht, NeverIncreasesResidual)
{
    const Case c = spectral_case(55, 1.0);
    const RecoveryResult r =
        be_only_variant(c.S.matrix, c.b, 10, c.bands, BandExcludedKind::bniht);
    for (std::size_t k = 1; k < r.residual_norm_history.size(); ++k) {
        EXPECT_LT(r.residual_norm_history[k], r.residual_norm_history[k - 1]);
    }
    EXPECT_NEAR(r.residual.norm(), r.residual_norm_history.back(), 1e-12);
    EXPECT_LE(r.estimate.support.size(), 10u);
}

TEST(Thresholding, RejectsBadArguments)
{
    const Case c = spectral_case(56, 1.0);
    EXPECT_THROW(bmt(c.S.matrix, c.b, 0, c.bands), std::invalid_argument);
    EXPECT_THROW(blot(CVector::Zero(3), c.S.matrix, c.b, 2, c.bands), std::invalid_argument);
    EXPECT_THROW(blosp(c.S.matrix, CVector::Zero(3), 2, c.bands), std::invalid_argument);
}
