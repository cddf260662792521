///
/// \file recovery.hpp
///
/// Result type shared by the greedy, thresholding and L1 solvers.
///
#ifndef BANDEX_RECOVERY_HPP
#define BANDEX_RECOVERY_HPP

#include <string_view>
#include <vector>

#include <bandex/models.hpp>
#include <bandex/numlin.hpp>

namespace bandex
{

enum class Termination
{
    sparsity_reached,
    residual_below_eps,
    residual_nonimproving,
    exclusion_exhausted,
    max_iterations,
};

std::string_view to_string(Termination t);

/// One selection made by a greedy or thresholding step.
struct SelectionStep
{
    Index pick = -1;
    IndexSet selected_before; ///< support (or picks) already held
};

struct RecoveryResult
{
    SparseSignal estimate; ///< support sorted ascending
    CVector residual;      ///< b - A x_hat
    std::vector<double> residual_norm_history;
    Index iterations = 0;
    Termination termination = Termination::sparsity_reached;
    std::vector<SelectionStep> trace;
};

/// Least-squares fit on `support`, packaged with the support sorted.
RecoveryResult fit_on_support(const CMatrix& A, const CVector& b,
                              std::span<const Index> support,
                              const GridSpec& grid);

/// Grid used when a solver is called without band information.
GridSpec index_grid(const CMatrix& A);

} // namespace bandex

#endif // BANDEX_RECOVERY_HPP
