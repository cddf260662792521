///
/// \file greedy.hpp
///
/// Orthogonal matching pursuit and its band-excluded / locally optimised
/// variants.
///
/// Every pursuit selects arg max_i |<r, a_i>| over admissible columns (lowest
/// index wins ties), refits by least squares on the grown support, and stops
/// early once the residual is numerically zero or nothing admissible is left.
///
#ifndef BANDEX_GREEDY_HPP
#define BANDEX_GREEDY_HPP

#include <bandex/coherence.hpp>
#include <bandex/recovery.hpp>

namespace bandex
{

/// Residuals at or below this fraction of ||b|| count as exact fits.
inline constexpr double exact_fit_tolerance = 1e-13;

RecoveryResult omp(const CMatrix& A, const CVector& b, Index sparsity);

/// Band-excluded OMP: candidates outside the exclusion zone of the support.
RecoveryResult bomp(const CMatrix& A, const CVector& b, Index sparsity,
                    const BandIndex& bands);

///
/// One pass of local optimisation.  For each position of `support` in order,
/// try every column of that index's LO band (the index itself included) as a
/// replacement, keep the swap with the smallest least-squares residual and
/// move on.  Returns the updated support in the same positional order.
///
IndexSet local_optimization(const CMatrix& A, const CVector& b,
                            std::span<const Index> support,
                            const BandIndex& bands);

/// BOMP with local optimisation after every selection.
RecoveryResult bloomp(const CMatrix& A, const CVector& b, Index sparsity,
                      const BandIndex& bands);

/// BLOOMP without band exclusion (only already-selected columns are barred).
RecoveryResult loomp(const CMatrix& A, const CVector& b, Index sparsity,
                     const BandIndex& bands);

} // namespace bandex

#endif // BANDEX_GREEDY_HPP
