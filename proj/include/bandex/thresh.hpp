///
/// \file thresh.hpp
///
/// Band-excluded thresholding and the pursuit algorithms built on it.
///
/// Iterative solvers share one stopping rule: quit as soon as the previous
/// residual is at most `eps` or the new residual fails to improve on it, and
/// return the previous iterate.  A negative `eps` selects the default
/// 1e-6 * ||b||.
///
#ifndef BANDEX_THRESH_HPP
#define BANDEX_THRESH_HPP

#include <bandex/coherence.hpp>
#include <bandex/recovery.hpp>

namespace bandex
{

inline constexpr double default_eps = -1.0;

///
/// Pick up to `count` indices by descending magnitude.  With `bands`, each
/// pick bars its exclusion zone from later picks; without, only the pick
/// itself is barred.  Zero-magnitude entries are never picked.  Ties go to
/// the lower index.
///
IndexSet band_excluded_select(const RVector& magnitudes, Index count,
                              const BandIndex* bands,
                              std::vector<SelectionStep>* trace = nullptr);

/// Band-excluded matched thresholding on |A^* b| followed by one refit.
RecoveryResult bmt(const CMatrix& A, const CVector& b, Index sparsity,
                   const BandIndex& bands);

/// Band-excluded selection on |x|, local optimisation, refit.  Returns the
/// full record (trace and residual).
RecoveryResult blot_fit(const CVector& x_dense, const CMatrix& A,
                        const CVector& b, Index sparsity,
                        const BandIndex& bands);

/// Band-excluded, locally optimised thresholding of a dense estimate.
SparseSignal blot(const CVector& x_dense, const CMatrix& A, const CVector& b,
                  Index sparsity, const BandIndex& bands);

/// Subspace pursuit and CoSaMP without band exclusion.
RecoveryResult sp(const CMatrix& A, const CVector& b, Index sparsity,
                  double eps = default_eps);
RecoveryResult cosamp(const CMatrix& A, const CVector& b, Index sparsity,
                      double eps = default_eps);

RecoveryResult blosp(const CMatrix& A, const CVector& b, Index sparsity,
                     const BandIndex& bands, double eps = default_eps);
RecoveryResult blocosamp(const CMatrix& A, const CVector& b, Index sparsity,
                         const BandIndex& bands, double eps = default_eps);

/// Iterate x <- BLOT(x + A^* r) with unit step.  Assumes unit-norm columns.
RecoveryResult bloiht(const CMatrix& A, const CVector& b, Index sparsity,
                      const BandIndex& bands, double eps = default_eps);

enum class BandExcludedKind
{
    bsp,
    bcosamp,
    bniht,
};

/// Band exclusion without local optimisation.  BNIHT uses the step
/// ||g_S||^2 / ||A g_S||^2 with g the gradient restricted to the support.
RecoveryResult be_only_variant(const CMatrix& A, const CVector& b,
                               Index sparsity, const BandIndex& bands,
                               BandExcludedKind kind,
                               double eps = default_eps);

} // namespace bandex

#endif // BANDEX_THRESH_HPP
