#include <bandex/thresh.hpp>

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include <bandex/greedy.hpp>

namespace bandex
{

namespace
{

constexpr int max_pursuit_iterations = 200;

double resolve_eps(double eps, const CVector& b)
{
    return eps < 0.0 ? 1e-6 * b.norm() : eps;
}

void check_args(const CMatrix& A, const CVector& b, Index sparsity,
                const BandIndex* bands)
{
    if (A.rows() != b.size()) {
        throw std::invalid_argument("thresholding: rows(A) != dim(b)");
    }
    if (sparsity < 1) {
        throw std::invalid_argument("thresholding: sparsity must be >= 1");
    }
    if (bands && bands->columns() != A.cols()) {
        throw std::invalid_argument("thresholding: band index mismatch");
    }
}

IndexSet merge(const IndexSet& a, const IndexSet& b)
{
    IndexSet out(a);
    out.insert(out.end(), b.begin(), b.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

struct PursuitOptions
{
    Index identify_factor = 1; ///< picks per identification = factor * s
    bool band_exclusion   = true;
    bool local_opt        = true;
};

///
/// Shared SP / CoSaMP skeleton:
///   candidates = supp(x) u identify(r); fit; prune to s; refit; stop rule.
///
RecoveryResult subspace_pursuit(const CMatrix& A, const CVector& b,
                                Index sparsity, const BandIndex* bands,
                                const PursuitOptions& opt, double eps)
{
    check_args(A, b, sparsity, bands);
    if ((opt.band_exclusion || opt.local_opt) && !bands) {
        throw std::invalid_argument("subspace_pursuit: band index required");
    }
    const GridSpec grid = bands ? bands->grid() : index_grid(A);
    const double tol    = resolve_eps(eps, b);
    const BandIndex* zone = opt.band_exclusion ? bands : nullptr;

    RecoveryResult current = fit_on_support(A, b, IndexSet{}, grid);
    current.residual_norm_history.push_back(b.norm());

    for (int n = 1; n <= max_pursuit_iterations; ++n) {
        if (current.residual.norm() <= tol) {
            current.termination = Termination::residual_below_eps;
            return current;
        }
        std::vector<SelectionStep> trace = std::move(current.trace);

        const RVector corr = (A.adjoint() * current.residual).cwiseAbs();
        const IndexSet identified = band_excluded_select(
            corr, opt.identify_factor * sparsity, zone, &trace);
        const IndexSet candidates = merge(current.estimate.support, identified);

        const RestrictedFit wide = restricted_least_squares(A, b, candidates);
        const CVector wide_dense = densify(A.cols(), candidates, wide.coefficients);
        IndexSet pruned = band_excluded_select(wide_dense.cwiseAbs(), sparsity,
                                               zone, &trace);
        if (opt.local_opt) {
            pruned = local_optimization(A, b, pruned, *bands);
        }

        RecoveryResult next = fit_on_support(A, b, pruned, grid);
        next.iterations = n;
        next.trace      = std::move(trace);
        const double prev_norm = current.residual.norm();
        const double next_norm = next.residual.norm();
        if (next_norm >= prev_norm) {
            if (n == 1) {
                // Nothing earlier to fall back on but the empty start.
                next.residual_norm_history = std::move(current.residual_norm_history);
                next.residual_norm_history.push_back(next_norm);
                next.termination = Termination::residual_nonimproving;
                return next;
            }
            current.trace       = std::move(next.trace);
            current.termination = Termination::residual_nonimproving;
            return current;
        }
        next.residual_norm_history = std::move(current.residual_norm_history);
        next.residual_norm_history.push_back(next_norm);
        current = std::move(next);
    }
    current.termination = Termination::max_iterations;
    return current;
}

} // namespace

IndexSet band_excluded_select(const RVector& magnitudes, Index count,
                              const BandIndex* bands,
                              std::vector<SelectionStep>* trace)
{
    const Index m = magnitudes.size();
    if (bands && bands->columns() != m) {
        throw std::invalid_argument("band_excluded_select: band index mismatch");
    }
    std::vector<Index> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        return magnitudes(a) > magnitudes(b);
    });

    IndexSet picks;
    std::vector<char> excluded(static_cast<std::size_t>(m), 0);
    for (Index i : order) {
        if (static_cast<Index>(picks.size()) >= count) {
            break;
        }
        if (!(magnitudes(i) > 0.0)) {
            break; // sorted: nothing nonzero remains
        }
        if (excluded[static_cast<std::size_t>(i)]) {
            continue;
        }
        if (trace) {
            trace->push_back({i, picks});
        }
        picks.push_back(i);
        if (bands) {
            bands->mark_exclusion(i, excluded);
        } else {
            excluded[static_cast<std::size_t>(i)] = 1;
        }
    }
    return picks;
}

RecoveryResult bmt(const CMatrix& A, const CVector& b, Index sparsity,
                   const BandIndex& bands)
{
    check_args(A, b, sparsity, &bands);
    std::vector<SelectionStep> trace;
    const RVector corr = (A.adjoint() * b).cwiseAbs();
    const IndexSet picks = band_excluded_select(corr, sparsity, &bands, &trace);
    RecoveryResult out = fit_on_support(A, b, picks, bands.grid());
    out.trace = std::move(trace);
    out.iterations = 1;
    out.residual_norm_history = {b.norm(), out.residual.norm()};
    out.termination = static_cast<Index>(picks.size()) < sparsity
                          ? Termination::exclusion_exhausted
                          : Termination::sparsity_reached;
    return out;
}

RecoveryResult blot_fit(const CVector& x_dense, const CMatrix& A,
                        const CVector& b, Index sparsity,
                        const BandIndex& bands)
{
    check_args(A, b, sparsity, &bands);
    if (x_dense.size() != A.cols()) {
        throw std::invalid_argument("blot: dim(x) != cols(A)");
    }
    std::vector<SelectionStep> trace;
    IndexSet picks = band_excluded_select(x_dense.cwiseAbs(), sparsity, &bands, &trace);
    picks = local_optimization(A, b, picks, bands);
    RecoveryResult out = fit_on_support(A, b, picks, bands.grid());
    out.trace = std::move(trace);
    out.iterations = 1;
    out.residual_norm_history = {b.norm(), out.residual.norm()};
    out.termination = static_cast<Index>(picks.size()) < sparsity
                          ? Termination::exclusion_exhausted
                          : Termination::sparsity_reached;
    return out;
}

SparseSignal blot(const CVector& x_dense, const CMatrix& A, const CVector& b,
                  Index sparsity, const BandIndex& bands)
{
    return blot_fit(x_dense, A, b, sparsity, bands).estimate;
}

RecoveryResult sp(const CMatrix& A, const CVector& b, Index sparsity, double eps)
{
    return subspace_pursuit(A, b, sparsity, nullptr, {1, false, false}, eps);
}

RecoveryResult cosamp(const CMatrix& A, const CVector& b, Index sparsity,
                      double eps)
{
    return subspace_pursuit(A, b, sparsity, nullptr, {2, false, false}, eps);
}

RecoveryResult blosp(const CMatrix& A, const CVector& b, Index sparsity,
                     const BandIndex& bands, double eps)
{
    return subspace_pursuit(A, b, sparsity, &bands, {1, true, true}, eps);
}

RecoveryResult blocosamp(const CMatrix& A, const CVector& b, Index sparsity,
                         const BandIndex& bands, double eps)
{
    return subspace_pursuit(A, b, sparsity, &bands, {2, true, true}, eps);
}

RecoveryResult bloiht(const CMatrix& A, const CVector& b, Index sparsity,
                      const BandIndex& bands, double eps)
{
    check_args(A, b, sparsity, &bands);
    const double tol = resolve_eps(eps, b);

    RecoveryResult current = fit_on_support(A, b, IndexSet{}, bands.grid());
    current.residual_norm_history.push_back(b.norm());
    CVector x = CVector::Zero(A.cols());

    for (int n = 1; n <= max_pursuit_iterations; ++n) {
        if (current.residual.norm() <= tol) {
            current.termination = Termination::residual_below_eps;
            return current;
        }
        const CVector step = x + A.adjoint() * current.residual;
        RecoveryResult next = blot_fit(step, A, b, sparsity, bands);
        next.iterations = n;
        const double next_norm = next.residual.norm();
        if (next_norm >= current.residual.norm() && n > 1) {
            current.termination = Termination::residual_nonimproving;
            return current;
        }
        next.residual_norm_history = std::move(current.residual_norm_history);
        next.residual_norm_history.push_back(next_norm);
        std::vector<SelectionStep> trace = std::move(current.trace);
        trace.insert(trace.end(), next.trace.begin(), next.trace.end());
        next.trace = std::move(trace);
        x = next.estimate.dense();
        current = std::move(next);
    }
    current.termination = Termination::max_iterations;
    return current;
}

namespace
{

RecoveryResult bniht(const CMatrix& A, const CVector& b, Index sparsity,
                     const BandIndex& bands, double eps)
{
    const double tol = resolve_eps(eps, b);
    const Index m = A.cols();

    RecoveryResult current = fit_on_support(A, b, IndexSet{}, bands.grid());
    current.residual_norm_history.push_back(b.norm());
    CVector x = CVector::Zero(m);

    for (int n = 1; n <= max_pursuit_iterations; ++n) {
        if (current.residual.norm() <= tol) {
            current.termination = Termination::residual_below_eps;
            return current;
        }
        std::vector<SelectionStep> trace = std::move(current.trace);
        const CVector grad = A.adjoint() * current.residual;

        IndexSet step_support = current.estimate.support;
        if (step_support.empty()) {
            step_support = band_excluded_select(grad.cwiseAbs(), sparsity, &bands);
        }
        CVector grad_s = CVector::Zero(m);
        for (Index j : step_support) {
            grad_s(j) = grad(j);
        }
        const double denom = (A * grad_s).squaredNorm();
        const double mu = denom > 0.0 ? grad_s.squaredNorm() / denom : 1.0;

        const CVector proposal = x + mu * grad;
        IndexSet picks = band_excluded_select(proposal.cwiseAbs(), sparsity,
                                              &bands, &trace);
        std::sort(picks.begin(), picks.end());

        RecoveryResult next;
        next.estimate.grid    = bands.grid();
        next.estimate.support = picks;
        next.estimate.amplitudes.resize(static_cast<Index>(picks.size()));
        CVector x_next = CVector::Zero(m);
        for (std::size_t k = 0; k < picks.size(); ++k) {
            next.estimate.amplitudes(static_cast<Index>(k)) = proposal(picks[k]);
            x_next(picks[k]) = proposal(picks[k]);
        }
        next.residual   = b - A * x_next;
        next.iterations = n;
        next.trace      = std::move(trace);

        const double next_norm = next.residual.norm();
        if (next_norm >= current.residual.norm() && n > 1) {
            current.trace       = std::move(next.trace);
            current.termination = Termination::residual_nonimproving;
            return current;
        }
        next.residual_norm_history = std::move(current.residual_norm_history);
        next.residual_norm_history.push_back(next_norm);
        x = std::move(x_next);
        current = std::move(next);
    }
    current.termination = Termination::max_iterations;
    return current;
}

} // namespace

RecoveryResult be_only_variant(const CMatrix& A, const CVector& b,
                               Index sparsity, const BandIndex& bands,
                               BandExcludedKind kind, double eps)
{
    check_args(A, b, sparsity, &bands);
    switch (kind) {
    case BandExcludedKind::bsp:
        return subspace_pursuit(A, b, sparsity, &bands, {1, true, false}, eps);
    case BandExcludedKind::bcosamp:
        return subspace_pursuit(A, b, sparsity, &bands, {2, true, false}, eps);
    case BandExcludedKind::bniht:
        return bniht(A, b, sparsity, bands, eps);
    }
    throw std::invalid_argument("be_only_variant: unknown kind");
}

} // namespace bandex
