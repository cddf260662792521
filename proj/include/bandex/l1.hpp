///
/// \file l1.hpp
///
/// Complex L1 solvers: Lasso, basis pursuit (denoising), analysis-form basis
/// pursuit for frames, and BLOT post-processing of their dense output.
///
#ifndef BANDEX_L1_HPP
#define BANDEX_L1_HPP

#include <vector>

#include <bandex/coherence.hpp>
#include <bandex/recovery.hpp>

namespace bandex
{

enum class LambdaRule
{
    half_sqrt_log_m, ///< 0.5 sqrt(ln M)
    sqrt_2_log_m,    ///< sqrt(2 ln M)
    explicit_value,  ///< L1Config::lambda
};

struct L1Config
{
    LambdaRule rule = LambdaRule::half_sqrt_log_m;
    double lambda   = 0.0; ///< used only with LambdaRule::explicit_value
    double sigma    = 0.0; ///< per-component noise standard deviation
    int max_iters   = 20000;
    double tol      = 1e-10; ///< relative objective change
};

/// lambda for a problem with `columns` unknowns.  Throws on a negative value.
double resolve_lambda(const L1Config& cfg, Index columns);

struct L1Solution
{
    CVector coefficients;
    bool converged = false;
    int iterations = 0;
    double objective = 0.0;
    std::vector<double> objective_history; ///< Lasso only
};

/// Complex soft threshold: phase kept, |out| = max(|in| - tau, 0).
CVector soft_threshold(const CVector& x, double tau);

///
/// min_z 0.5 ||b - A z||^2 + lambda sigma ||z||_1 by monotone FISTA with
/// step 1/L, L the power-iteration estimate of ||A||^2.  The objective
/// history is non-increasing.
///
L1Solution lasso(const CMatrix& A, const CVector& b, const L1Config& cfg);
L1Solution lasso(const LinearOperator& A, const CVector& b, const L1Config& cfg);

struct AdmmOptions
{
    double rho    = 3.0;  ///< penalty, applied after scaling b to unit norm
    int max_iters = 20000;
    double tol    = 1e-8; ///< primal and dual residual tolerance (relative)
    double relaxation = 1.0; ///< over-relaxation factor in (0, 2)
    bool adaptive_rho = false; ///< residual balancing every 10 iterations
};

///
/// min ||z||_1 subject to ||A z - b|| <= eps_data by ADMM on the splitting
/// w = z, v = A z.  eps_data = 0 is equality-constrained basis pursuit.
/// Throws std::invalid_argument when the constraint is infeasible.
///
L1Solution basis_pursuit(const CMatrix& A, const CVector& b, double eps_data,
                         const AdmmOptions& opt = {});
L1Solution basis_pursuit(const LinearOperator& A, const CVector& b,
                         double eps_data, const AdmmOptions& opt = {});

///
/// min ||Psi^* z||_1 subject to ||Phi z - b|| <= eps_data over signals z.
/// Assumes Psi Psi^* = c I for some c > 0 (tight frame).  Returns z.
///
L1Solution analysis_bp(const CMatrix& Phi, const CMatrix& Psi,
                       const CVector& b, double eps_data,
                       const AdmmOptions& opt = {});

/// BLOT applied to a dense L1 estimate.
RecoveryResult blot_postprocess(const CVector& z_dense, const CMatrix& A,
                                const CVector& b, Index sparsity,
                                const BandIndex& bands);

/// Package a dense estimate (nonzero entries) as a recovery result.
RecoveryResult dense_result(const CVector& z_dense, const CMatrix& A,
                            const CVector& b, const GridSpec& grid);

} // namespace bandex

#endif // BANDEX_L1_HPP
