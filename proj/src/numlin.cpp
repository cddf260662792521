#include <bandex/numlin.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/QR>

namespace bandex
{

namespace
{

void require(bool ok, const char* what)
{
    if (!ok) {
        throw std::invalid_argument(what);
    }
}

} // namespace

Complex inner(const CVector& u, const CVector& v)
{
    require(u.size() == v.size(), "inner: dimension mismatch");
    // Eigen's dot() conjugates its left operand.
    return u.dot(v);
}

CVector matvec(const CMatrix& A, const CVector& x)
{
    require(A.cols() == x.size(), "matvec: cols(A) != dim(x)");
    return A * x;
}

CVector adjoint_apply(const CMatrix& A, const CVector& r)
{
    require(A.rows() == r.size(), "adjoint_apply: rows(A) != dim(r)");
    return A.adjoint() * r;
}

CMatrix gather_columns(const CMatrix& A, std::span<const Index> support)
{
    CMatrix sub(A.rows(), static_cast<Index>(support.size()));
    for (std::size_t k = 0; k < support.size(); ++k) {
        const Index j = support[k];
        require(j >= 0 && j < A.cols(), "gather_columns: index out of range");
        sub.col(static_cast<Index>(k)) = A.col(j);
    }
    return sub;
}

RestrictedFit restricted_least_squares(const CMatrix& A, const CVector& b,
                                       std::span<const Index> support)
{
    require(A.rows() == b.size(), "restricted_least_squares: rows(A) != dim(b)");

    RestrictedFit fit;
    fit.support.assign(support.begin(), support.end());
    if (support.empty()) {
        fit.coefficients.resize(0);
        fit.residual = b;
        return fit;
    }

    const CMatrix sub = gather_columns(A, support);
    Eigen::CompleteOrthogonalDecomposition<CMatrix> cod;
    const double dim = static_cast<double>(std::max(sub.rows(), sub.cols()));
    cod.setThreshold(dim * std::numeric_limits<double>::epsilon());
    cod.compute(sub);

    fit.coefficients = cod.solve(b);
    fit.residual     = b - sub * fit.coefficients;
    return fit;
}

CVector densify(Index size, std::span<const Index> support,
                const CVector& values)
{
    require(static_cast<Index>(support.size()) == values.size(),
            "densify: support and values differ in length");
    CVector x = CVector::Zero(size);
    for (std::size_t k = 0; k < support.size(); ++k) {
        require(support[k] >= 0 && support[k] < size,
                "densify: index out of range");
        x(support[k]) += values(static_cast<Index>(k));
    }
    return x;
}

CVector DenseOperator::apply(const CVector& x) const
{
    return matvec(A_, x);
}

CVector DenseOperator::adjoint(const CVector& r) const
{
    return adjoint_apply(A_, r);
}

CMatrix DenseOperator::outer_gram() const
{
    return A_ * A_.adjoint();
}

double spectral_norm_squared(const LinearOperator& A, int iterations, double rel_tol)
{
    if (A.rows() == 0 || A.cols() == 0) {
        return 0.0;
    }
    CVector v = CVector::Ones(A.cols()) / std::sqrt(static_cast<double>(A.cols()));
    double estimate = 0.0;
    for (int it = 0; it < iterations; ++it) {
        const CVector w = A.adjoint(A.apply(v));
        const double norm = w.norm();
        if (norm == 0.0) {
            return 0.0;
        }
        v = w / norm;
        const bool settled = std::abs(norm - estimate) <= rel_tol * norm;
        estimate = norm;
        if (settled) {
            break;
        }
    }
    return estimate;
}

double spectral_norm_squared(const CMatrix& A, int iterations, double rel_tol)
{
    return spectral_norm_squared(DenseOperator(A), iterations, rel_tol);
}

} // namespace bandex
