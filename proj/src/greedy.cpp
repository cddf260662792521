#include <bandex/greedy.hpp>

#include <algorithm>
#include <stdexcept>

#include <Eigen/QR>

namespace bandex
{

// ---------------------------------------------------------------------------
// Shared result helpers
// ---------------------------------------------------------------------------

std::string_view to_string(Termination t)
{
    switch (t) {
    case Termination::sparsity_reached:      return "sparsity_reached";
    case Termination::residual_below_eps:    return "residual_below_eps";
    case Termination::residual_nonimproving: return "residual_nonimproving";
    case Termination::exclusion_exhausted:   return "exclusion_exhausted";
    case Termination::max_iterations:        return "max_iterations";
    }
    return "unknown";
}

GridSpec index_grid(const CMatrix& A)
{
    return GridSpec{1, static_cast<double>(std::max<Index>(1, A.cols()))};
}

RecoveryResult fit_on_support(const CMatrix& A, const CVector& b,
                              std::span<const Index> support,
                              const GridSpec& grid)
{
    IndexSet sorted(support.begin(), support.end());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw std::invalid_argument("fit_on_support: duplicate support index");
    }
    RestrictedFit fit = restricted_least_squares(A, b, sorted);

    RecoveryResult out;
    out.estimate.grid       = grid;
    out.estimate.support    = std::move(sorted);
    out.estimate.amplitudes = std::move(fit.coefficients);
    out.residual            = std::move(fit.residual);
    return out;
}

namespace
{

enum class Exclusion
{
    selected_only,
    bands,
};

void check_pursuit_args(const CMatrix& A, const CVector& b, Index sparsity)
{
    if (A.rows() != b.size()) {
        throw std::invalid_argument("pursuit: rows(A) != dim(b)");
    }
    if (sparsity < 0 || sparsity > A.rows()) {
        throw std::invalid_argument("pursuit: sparsity must lie in [0, rows(A)]");
    }
}

RecoveryResult pursuit(const CMatrix& A, const CVector& b, Index sparsity,
                       const BandIndex* bands, Exclusion exclusion,
                       bool optimize)
{
    check_pursuit_args(A, b, sparsity);
    if (bands && bands->columns() != A.cols()) {
        throw std::invalid_argument("pursuit: band index built for another matrix");
    }
    const GridSpec grid = bands ? bands->grid() : index_grid(A);
    const double b_norm = b.norm();
    const auto m = static_cast<std::size_t>(A.cols());

    IndexSet support;
    RecoveryResult out = fit_on_support(A, b, support, grid);
    out.residual_norm_history.push_back(b_norm);
    out.termination = Termination::sparsity_reached;

    std::vector<char> excluded(m, 0);
    while (static_cast<Index>(support.size()) < sparsity) {
        if (out.residual.norm() <= exact_fit_tolerance * b_norm) {
            out.termination = Termination::residual_below_eps;
            break;
        }
        const CVector corr = A.adjoint() * out.residual;
        Index pick = -1;
        double best = -1.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (excluded[i]) {
                continue;
            }
            const double mag = std::abs(corr(static_cast<Index>(i)));
            if (mag > best) {
                best = mag;
                pick = static_cast<Index>(i);
            }
        }
        if (pick < 0) {
            out.termination = Termination::exclusion_exhausted;
            break;
        }

        out.trace.push_back({pick, support});
        support.push_back(pick);
        if (optimize) {
            support = local_optimization(A, b, support, *bands);
        }

        RecoveryResult next = fit_on_support(A, b, support, grid);
        next.residual_norm_history = std::move(out.residual_norm_history);
        next.residual_norm_history.push_back(next.residual.norm());
        next.trace      = std::move(out.trace);
        next.iterations = out.iterations + 1;
        next.termination = out.termination;
        out = std::move(next);

        // LO may move earlier picks, so the zone is rebuilt from the support.
        std::fill(excluded.begin(), excluded.end(), char{0});
        for (Index k : support) {
            if (exclusion == Exclusion::bands) {
                bands->mark_exclusion(k, excluded);
            } else {
                excluded[static_cast<std::size_t>(k)] = 1;
            }
        }
    }
    return out;
}

} // namespace

RecoveryResult omp(const CMatrix& A, const CVector& b, Index sparsity)
{
    return pursuit(A, b, sparsity, nullptr, Exclusion::selected_only, false);
}

RecoveryResult bomp(const CMatrix& A, const CVector& b, Index sparsity,
                    const BandIndex& bands)
{
    return pursuit(A, b, sparsity, &bands, Exclusion::bands, false);
}

RecoveryResult bloomp(const CMatrix& A, const CVector& b, Index sparsity,
                      const BandIndex& bands)
{
    return pursuit(A, b, sparsity, &bands, Exclusion::bands, true);
}

RecoveryResult loomp(const CMatrix& A, const CVector& b, Index sparsity,
                     const BandIndex& bands)
{
    return pursuit(A, b, sparsity, &bands, Exclusion::selected_only, true);
}

IndexSet local_optimization(const CMatrix& A, const CVector& b,
                            std::span<const Index> support,
                            const BandIndex& bands)
{
    if (A.rows() != b.size()) {
        throw std::invalid_argument("local_optimization: rows(A) != dim(b)");
    }
    if (bands.columns() != A.cols()) {
        throw std::invalid_argument("local_optimization: band index mismatch");
    }
    IndexSet current(support.begin(), support.end());
    const std::size_t k = current.size();
    if (k == 0) {
        return current;
    }

    for (std::size_t pos = 0; pos < k; ++pos) {
        IndexSet others;
        others.reserve(k - 1);
        for (std::size_t q = 0; q < k; ++q) {
            if (q != pos) {
                others.push_back(current[q]);
            }
        }

        // Orthonormal basis of span(A_others); swapping column j in leaves a
        // residual equal to the projection of r0 off the new direction q_j.
        CMatrix basis(A.rows(), 0);
        if (!others.empty()) {
            Eigen::ColPivHouseholderQR<CMatrix> qr(gather_columns(A, others));
            const Index rank = qr.rank();
            basis = CMatrix(qr.householderQ()).leftCols(rank);
        }
        const CVector r0 = b - basis * (basis.adjoint() * b);

        auto residual_with = [&](Index j) {
            const CVector q = A.col(j) - basis * (basis.adjoint() * A.col(j));
            const double qq = q.squaredNorm();
            if (qq <= 1e-24 * A.col(j).squaredNorm()) {
                return r0.norm();
            }
            return (r0 - q * (q.dot(r0) / qq)).norm();
        };

        const Index incumbent = current[pos];
        Index best_index = incumbent;
        double best_res  = residual_with(incumbent);
        for (Index j : bands.lo_candidates(incumbent)) {
            if (j == incumbent ||
                std::find(others.begin(), others.end(), j) != others.end()) {
                continue;
            }
            const double res = residual_with(j);
            if (res < best_res) {
                best_res   = res;
                best_index = j;
            }
        }
        current[pos] = best_index;
    }
    return current;
}

} // namespace bandex
