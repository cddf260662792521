///
/// \file metrics.hpp
///
/// Success criteria and error measures for a single trial.
///
#ifndef BANDEX_METRICS_HPP
#define BANDEX_METRICS_HPP

#include <limits>
#include <vector>

#include <bandex/coherence.hpp>
#include <bandex/recovery.hpp>

namespace bandex
{

/// max_j |a_j - b_j| after sorting both.  Throws on unequal sizes.
double bottleneck_1d(std::vector<double> a, std::vector<double> b);

/// Symmetric Hausdorff distance.  Throws if exactly one set is empty.
double hausdorff_1d(const std::vector<double>& a, const std::vector<double>& b);

/// Distances strictly below this many RL count as resolved.
inline constexpr double success_radius_rl = 1.0;

struct TrialOutcome
{
    double bottleneck_rl   = std::numeric_limits<double>::infinity();
    bool success           = false;
    double rel_residual    = 0.0;
    double rel_coeff_error = 0.0;
    double rel_signal_error = std::numeric_limits<double>::quiet_NaN();
};

/// ||x - ref|| / ||ref||; ||x|| when ref is zero.
double relative_error(const CVector& x, const CVector& ref);

///
/// Score an on-grid recovery.  A cardinality mismatch is a failure with
/// bottleneck +inf.
///
TrialOutcome score_trial(const SparseSignal& truth, const RecoveryResult& result,
                         const CVector& b);

///
/// Score against continuous frequencies.  The coefficient error is taken
/// against `gridded`, the truth snapped to the estimate's grid.
///
TrialOutcome score_trial(const OffGridScene& truth, const SparseSignal& gridded,
                         const RecoveryResult& result, const CVector& b);

///
/// Size of a maximum matching between `estimate` and `truth` in which an
/// estimated index i may pair with a true index J only if i lies in B(J).
/// Equal to |estimate| exactly when every estimated index sits in the band
/// of its own distinct true component.
///
Index band_matching_size(const IndexSet& estimate, const IndexSet& truth,
                         const BandIndex& bands);

} // namespace bandex

#endif // BANDEX_METRICS_HPP
