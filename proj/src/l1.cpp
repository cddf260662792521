#include <bandex/l1.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <bandex/thresh.hpp>

namespace bandex
{

double resolve_lambda(const L1Config& cfg, Index columns)
{
    if (columns < 1) {
        throw std::invalid_argument("resolve_lambda: columns must be >= 1");
    }
    const double log_m = std::log(static_cast<double>(columns));
    double lambda = 0.0;
    switch (cfg.rule) {
    case LambdaRule::half_sqrt_log_m: lambda = 0.5 * std::sqrt(log_m); break;
    case LambdaRule::sqrt_2_log_m:    lambda = std::sqrt(2.0 * log_m); break;
    case LambdaRule::explicit_value:  lambda = cfg.lambda; break;
    }
    if (!(lambda >= 0.0)) {
        throw std::invalid_argument("resolve_lambda: lambda must be >= 0");
    }
    return lambda;
}

CVector soft_threshold(const CVector& x, double tau)
{
    CVector out(x.size());
    for (Index i = 0; i < x.size(); ++i) {
        const double mag = std::abs(x(i));
        out(i) = mag > tau ? x(i) * ((mag - tau) / mag) : Complex{0.0, 0.0};
    }
    return out;
}

namespace
{

double lasso_objective(const CVector& Az, const CVector& z, const CVector& b,
                       double tau)
{
    return 0.5 * (b - Az).squaredNorm() + tau * z.lpNorm<1>();
}

CVector project_ball(const CVector& p, const CVector& center, double radius)
{
    const CVector d = p - center;
    const double n = d.norm();
    if (n <= radius) {
        return p;
    }
    return center + d * (radius / n);
}

void check_feasible(const CMatrix& A, const CVector& b, double eps)
{
    if (A.rows() <= A.cols()) {
        return;
    }
    const Eigen::CompleteOrthogonalDecomposition<CMatrix> cod(A);
    const CVector r = b - A * cod.solve(b);
    if (r.norm() > eps * (1.0 + 1e-12) + 1e-14 * b.norm()) {
        throw std::invalid_argument(
            "basis_pursuit: data constraint infeasible (eps below distance to range)");
    }
}

void check_feasible(const LinearOperator& A, const CVector& b, double eps)
{
    if (A.rows() <= A.cols()) {
        return;
    }
    CMatrix dense(A.rows(), A.cols());
    for (Index j = 0; j < A.cols(); ++j) {
        dense.col(j) = A.apply(CVector::Unit(A.cols(), j));
    }
    check_feasible(dense, b, eps);
}

bool admm_done(double primal, double dual, double primal_scale,
               double dual_scale, double tol)
{
    return primal <= tol * std::max(primal_scale, 1e-300) &&
           dual <= tol * std::max(dual_scale, 1e-300);
}

// Residual balancing: grow rho when the primal residual dominates.
double balance_factor(double primal_rel, double dual_rel)
{
    if (primal_rel > 10.0 * dual_rel) {
        return 2.0;
    }
    if (dual_rel > 10.0 * primal_rel) {
        return 0.5;
    }
    return 1.0;
}

} // namespace

L1Solution lasso(const CMatrix& A, const CVector& b, const L1Config& cfg)
{
    return lasso(DenseOperator(A), b, cfg);
}

L1Solution lasso(const LinearOperator& A, const CVector& b, const L1Config& cfg)
{
    if (A.rows() != b.size()) {
        throw std::invalid_argument("lasso: rows(A) != dim(b)");
    }
    if (!(cfg.sigma >= 0.0)) {
        throw std::invalid_argument("lasso: sigma must be >= 0");
    }
    if (cfg.max_iters < 1) {
        throw std::invalid_argument("lasso: max_iters must be >= 1");
    }
    const double tau = resolve_lambda(cfg, A.cols()) * cfg.sigma;
    const Index m = A.cols();

    L1Solution out;
    out.coefficients = CVector::Zero(m);
    double f_x = 0.5 * b.squaredNorm();
    out.objective_history.push_back(f_x);

    const double L = spectral_norm_squared(A) * (1.0 + 1e-9);
    if (L <= 0.0 || b.squaredNorm() == 0.0) {
        out.converged = true;
        out.objective = f_x;
        return out;
    }

    CVector x  = CVector::Zero(m);
    CVector Ax = CVector::Zero(A.rows());
    CVector y  = x;
    CVector Ay = Ax;
    double t = 1.0;
    bool restarted = false;

    for (int k = 1; k <= cfg.max_iters; ++k) {
        out.iterations = k;
        const CVector grad = A.adjoint(Ay - b);
        const CVector z  = soft_threshold(y - grad / L, tau / L);
        const CVector Az = A.apply(z);
        const double f_z = lasso_objective(Az, z, b, tau);
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));

        if (f_z <= f_x) {
            const double change = (f_x - f_z) / f_x;
            const double beta = (t - 1.0) / t_next;
            y  = z + beta * (z - x);
            Ay = Az + beta * (Az - Ax);
            x  = z;
            Ax = Az;
            f_x = f_z;
            t = t_next;
            restarted = false;
            out.objective_history.push_back(f_x);
            if (change < cfg.tol || f_x == 0.0) {
                out.converged = true;
                break;
            }
        } else {
            out.objective_history.push_back(f_x);
            if (restarted) {
                // A plain proximal step from x failed to descend: stationary.
                out.converged = true;
                break;
            }
            // Momentum overshot; restart from the incumbent.
            y = x;
            Ay = Ax;
            t = 1.0;
            restarted = true;
        }
    }
    out.coefficients = std::move(x);
    out.objective = f_x;
    return out;
}

L1Solution basis_pursuit(const CMatrix& A, const CVector& b, double eps_data,
                         const AdmmOptions& opt)
{
    return basis_pursuit(DenseOperator(A), b, eps_data, opt);
}

L1Solution basis_pursuit(const LinearOperator& A, const CVector& b,
                         double eps_data, const AdmmOptions& opt)
{
    if (A.rows() != b.size()) {
        throw std::invalid_argument("basis_pursuit: rows(A) != dim(b)");
    }
    if (!(eps_data >= 0.0)) {
        throw std::invalid_argument("basis_pursuit: eps_data must be >= 0");
    }
    if (!(opt.rho > 0.0) || opt.max_iters < 1 ||
        !(opt.relaxation > 0.0 && opt.relaxation < 2.0)) {
        throw std::invalid_argument(
            "basis_pursuit: need rho > 0, max_iters >= 1, relaxation in (0, 2)");
    }
    const Index m = A.cols();
    const double scale = b.norm();

    L1Solution out;
    out.coefficients = CVector::Zero(m);
    if (eps_data >= scale) {
        out.converged = true;
        return out;
    }
    check_feasible(A, b, eps_data);

    // Unit-norm data keeps the threshold 1/rho meaningful at any scale.
    const CVector bn = b / scale;
    const double en = eps_data / scale;

    const CMatrix G = A.outer_gram();
    const CMatrix K = CMatrix::Identity(A.rows(), A.rows()) + G;
    const Eigen::LLT<CMatrix> llt(K);
    if (llt.info() != Eigen::Success) {
        throw std::runtime_error("basis_pursuit: factorisation failed");
    }

    CVector w  = CVector::Zero(m);
    CVector u1 = CVector::Zero(m);
    CVector v  = bn;
    CVector u2 = CVector::Zero(A.rows());
    double rho = opt.rho;

    for (int k = 1; k <= opt.max_iters; ++k) {
        out.iterations = k;
        // With q = p + A^* c and K = I + A A^*:
        //   z = (I + A^* A)^{-1} q = p + A^* (c - K^{-1} A q),  A z = K^{-1} A q.
        const CVector p  = w - u1;
        const CVector c  = v - u2;
        const CVector Az = llt.solve(A.apply(p) + G * c);
        const CVector z  = p + A.adjoint(c - Az);

        const CVector w_old = w;
        const CVector v_old = v;
        const CVector zr  = opt.relaxation * z + (1.0 - opt.relaxation) * w_old;
        const CVector Azr = opt.relaxation * Az + (1.0 - opt.relaxation) * v_old;
        w = soft_threshold(zr + u1, 1.0 / rho);
        v = project_ball(Azr + u2, bn, en);
        u1 += zr - w;
        u2 += Azr - v;

        const double primal = std::sqrt((z - w).squaredNorm() + (Az - v).squaredNorm());
        const double dual = rho * std::sqrt((w - w_old).squaredNorm() +
                                            (v - v_old).squaredNorm());
        const double pscale = std::sqrt(std::max(z.squaredNorm() + Az.squaredNorm(),
                                                 w.squaredNorm() + v.squaredNorm()));
        const double dscale = rho * std::sqrt(u1.squaredNorm() + u2.squaredNorm());
        if (admm_done(primal, dual, pscale, dscale, opt.tol)) {
            out.converged = true;
            break;
        }
        // The z-update does not depend on rho, so rebalancing costs nothing.
        if (opt.adaptive_rho && k % 10 == 0) {
            const double factor = balance_factor(primal / std::max(pscale, 1e-300),
                                                 dual / std::max(dscale, 1e-300));
            rho *= factor;
            u1 /= factor;
            u2 /= factor;
        }
    }
    out.coefficients = w * scale;
    out.objective = out.coefficients.lpNorm<1>();
    return out;
}

L1Solution analysis_bp(const CMatrix& Phi, const CMatrix& Psi,
                       const CVector& b, double eps_data,
                       const AdmmOptions& opt)
{
    if (Phi.rows() != b.size() || Phi.cols() != Psi.rows()) {
        throw std::invalid_argument("analysis_bp: inconsistent dimensions");
    }
    if (!(eps_data >= 0.0)) {
        throw std::invalid_argument("analysis_bp: eps_data must be >= 0");
    }
    if (!(opt.rho > 0.0) || opt.max_iters < 1 ||
        !(opt.relaxation > 0.0 && opt.relaxation < 2.0)) {
        throw std::invalid_argument(
            "analysis_bp: need rho > 0, max_iters >= 1, relaxation in (0, 2)");
    }
    const Index r = Phi.cols();
    const double scale = b.norm();

    L1Solution out;
    out.coefficients = CVector::Zero(r);
    if (eps_data >= scale) {
        out.converged = true;
        return out;
    }
    check_feasible(Phi, b, eps_data);

    const double frame_bound = Psi.row(0).squaredNorm();
    if (!(frame_bound > 0.0)) {
        throw std::invalid_argument("analysis_bp: Psi has a zero row");
    }
    const CVector bn = b / scale;
    const double en = eps_data / scale;

    const CMatrix K = frame_bound * CMatrix::Identity(r, r) + Phi.adjoint() * Phi;
    const Eigen::LLT<CMatrix> llt(K);
    if (llt.info() != Eigen::Success) {
        throw std::runtime_error("analysis_bp: factorisation failed");
    }

    const Index m = Psi.cols();
    CVector w  = CVector::Zero(m);
    CVector u1 = CVector::Zero(m);
    CVector v  = bn;
    CVector u2 = CVector::Zero(Phi.rows());
    CVector z  = CVector::Zero(r);
    const double rho = opt.rho;

    for (int k = 1; k <= opt.max_iters; ++k) {
        out.iterations = k;
        z = llt.solve(Psi * (w - u1) + Phi.adjoint() * (v - u2));
        const CVector Pz = Psi.adjoint() * z;
        const CVector Fz = Phi * z;

        const CVector w_old = w;
        const CVector v_old = v;
        const CVector Pzr = opt.relaxation * Pz + (1.0 - opt.relaxation) * w_old;
        const CVector Fzr = opt.relaxation * Fz + (1.0 - opt.relaxation) * v_old;
        w = soft_threshold(Pzr + u1, 1.0 / rho);
        v = project_ball(Fzr + u2, bn, en);
        u1 += Pzr - w;
        u2 += Fzr - v;

        const double primal = std::sqrt((Pz - w).squaredNorm() + (Fz - v).squaredNorm());
        const double dual = rho * std::sqrt((w - w_old).squaredNorm() +
                                            (v - v_old).squaredNorm());
        const double pscale = std::sqrt(std::max(Pz.squaredNorm() + Fz.squaredNorm(),
                                                 w.squaredNorm() + v.squaredNorm()));
        const double dscale = rho * std::sqrt(u1.squaredNorm() + u2.squaredNorm());
        if (admm_done(primal, dual, pscale, dscale, opt.tol)) {
            out.converged = true;
            break;
        }
    }
    out.coefficients = z * scale;
    out.objective = (Psi.adjoint() * out.coefficients).lpNorm<1>();
    return out;
}

RecoveryResult blot_postprocess(const CVector& z_dense, const CMatrix& A,
                                const CVector& b, Index sparsity,
                                const BandIndex& bands)
{
    return blot_fit(z_dense, A, b, sparsity, bands);
}

RecoveryResult dense_result(const CVector& z_dense, const CMatrix& A,
                            const CVector& b, const GridSpec& grid)
{
    if (z_dense.size() != A.cols() || A.rows() != b.size()) {
        throw std::invalid_argument("dense_result: inconsistent dimensions");
    }
    RecoveryResult out;
    out.estimate.grid = grid;
    std::vector<Complex> values;
    for (Index j = 0; j < z_dense.size(); ++j) {
        if (z_dense(j) != Complex{0.0, 0.0}) {
            out.estimate.support.push_back(j);
            values.push_back(z_dense(j));
        }
    }
    out.estimate.amplitudes =
        Eigen::Map<const CVector>(values.data(), static_cast<Index>(values.size()));
    out.residual = b - A * z_dense;
    out.iterations = 1;
    out.residual_norm_history = {b.norm(), out.residual.norm()};
    return out;
}

} // namespace bandex
