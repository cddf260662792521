#include <bandex/metrics.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bandex
{

double bottleneck_1d(std::vector<double> a, std::vector<double> b)
{
    if (a.size() != b.size()) {
        throw std::invalid_argument("bottleneck_1d: sets differ in cardinality");
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        d = std::max(d, std::abs(a[j] - b[j]));
    }
    return d;
}

namespace
{

// sup over x in from of the distance to the nearest point of to (sorted).
double directed(const std::vector<double>& from, const std::vector<double>& to)
{
    double d = 0.0;
    for (double x : from) {
        const auto it = std::lower_bound(to.begin(), to.end(), x);
        double best = std::numeric_limits<double>::infinity();
        if (it != to.end()) {
            best = *it - x;
        }
        if (it != to.begin()) {
            best = std::min(best, x - *std::prev(it));
        }
        d = std::max(d, best);
    }
    return d;
}

} // namespace

double hausdorff_1d(const std::vector<double>& a, const std::vector<double>& b)
{
    if (a.empty() != b.empty()) {
        throw std::invalid_argument("hausdorff_1d: one set is empty");
    }
    std::vector<double> sa(a), sb(b);
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    return std::max(directed(sa, sb), directed(sb, sa));
}

double relative_error(const CVector& x, const CVector& ref)
{
    if (x.size() != ref.size()) {
        throw std::invalid_argument("relative_error: size mismatch");
    }
    const double denom = ref.norm();
    const double num = (x - ref).norm();
    return denom > 0.0 ? num / denom : num;
}

namespace
{

TrialOutcome score_positions(const std::vector<double>& truth,
                             const RecoveryResult& result, const CVector& b)
{
    TrialOutcome out;
    const std::vector<double> est = result.estimate.positions();
    if (est.size() == truth.size()) {
        out.bottleneck_rl = bottleneck_1d(est, truth);
        out.success = out.bottleneck_rl < success_radius_rl;
    }
    const double bn = b.norm();
    out.rel_residual = bn > 0.0 ? result.residual.norm() / bn : result.residual.norm();
    return out;
}

} // namespace

TrialOutcome score_trial(const SparseSignal& truth, const RecoveryResult& result,
                         const CVector& b)
{
    if (truth.grid.columns() != result.estimate.grid.columns()) {
        throw std::invalid_argument("score_trial: truth and estimate grids differ");
    }
    TrialOutcome out = score_positions(truth.positions(), result, b);
    out.rel_coeff_error = relative_error(result.estimate.dense(), truth.dense());
    return out;
}

TrialOutcome score_trial(const OffGridScene& truth, const SparseSignal& gridded,
                         const RecoveryResult& result, const CVector& b)
{
    if (gridded.grid.columns() != result.estimate.grid.columns()) {
        throw std::invalid_argument("score_trial: truth and estimate grids differ");
    }
    TrialOutcome out = score_positions(truth.frequencies, result, b);
    out.rel_coeff_error = relative_error(result.estimate.dense(), gridded.dense());
    return out;
}

namespace
{

bool augment(std::size_t i, const std::vector<std::vector<std::size_t>>& adj,
             std::vector<char>& seen, std::vector<long>& owner)
{
    for (std::size_t j : adj[i]) {
        if (seen[j]) {
            continue;
        }
        seen[j] = 1;
        if (owner[j] < 0 || augment(static_cast<std::size_t>(owner[j]), adj, seen, owner)) {
            owner[j] = static_cast<long>(i);
            return true;
        }
    }
    return false;
}

} // namespace

Index band_matching_size(const IndexSet& estimate, const IndexSet& truth,
                         const BandIndex& bands)
{
    std::vector<std::vector<std::size_t>> adj(estimate.size());
    for (std::size_t i = 0; i < estimate.size(); ++i) {
        for (std::size_t j = 0; j < truth.size(); ++j) {
            const auto band = bands.band(truth[j]);
            if (std::binary_search(band.begin(), band.end(), estimate[i])) {
                adj[i].push_back(j);
            }
        }
    }
    // Kuhn's augmenting paths; sets here hold at most a few dozen indices.
    std::vector<long> owner(truth.size(), -1);
    Index matched = 0;
    for (std::size_t i = 0; i < estimate.size(); ++i) {
        std::vector<char> seen(truth.size(), 0);
        if (augment(i, adj, seen, owner)) {
            ++matched;
        }
    }
    return matched;
}

} // namespace bandex
