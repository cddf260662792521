///
/// \file numlin.hpp
///
/// Dense complex linear algebra shared by every recovery algorithm.
///
/// Storage is Eigen's default column-major layout, so a column a_j of a
/// sensing matrix is contiguous in memory.  The complex inner product used
/// throughout the library is conjugate-linear in its first argument:
///
///     <u, v> = sum_i conj(u_i) v_i
///
#ifndef BANDEX_NUMLIN_HPP
#define BANDEX_NUMLIN_HPP

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace bandex
{

using Index   = Eigen::Index;
using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

/// Ordered list of column indices (0-based).
using IndexSet = std::vector<Index>;

/// <u, v> = sum conj(u_i) v_i.  Throws std::invalid_argument on size mismatch.
Complex inner(const CVector& u, const CVector& v);

/// A x.  Throws std::invalid_argument when cols(A) != dim(x).
CVector matvec(const CMatrix& A, const CVector& x);

/// A^* r (conjugate transpose applied); entry j equals <a_j, r>.
CVector adjoint_apply(const CMatrix& A, const CVector& r);

/// Columns of A listed in `support`, in that order.
CMatrix gather_columns(const CMatrix& A, std::span<const Index> support);

/// Least-squares fit restricted to a column subset.
struct RestrictedFit
{
    IndexSet support;      ///< columns used, in caller order
    CVector coefficients;  ///< one value per entry of `support`
    CVector residual;      ///< b - A_S coefficients
};

///
/// Minimise ||A z - b||_2 over z supported on `support`.
///
/// Solved by a complete orthogonal decomposition built on column-pivoted
/// Householder QR.  Columns whose pivot falls below
/// max(rows, cols) * eps * (largest column norm) are treated as dependent and
/// the minimum-norm minimiser is returned.  An empty support yields an empty
/// coefficient vector and residual = b.
///
RestrictedFit restricted_least_squares(const CMatrix& A, const CVector& b,
                                       std::span<const Index> support);

/// Scatter (support, values) into a dense length-`size` vector.
CVector densify(Index size, std::span<const Index> support,
                const CVector& values);

///
/// Matrix-free view of a sensing matrix for iterative solvers.
///
class LinearOperator
{
public:
    virtual ~LinearOperator() = default;

    virtual Index rows() const = 0;
    virtual Index cols() const = 0;
    /// A x
    virtual CVector apply(const CVector& x) const = 0;
    /// A^* r
    virtual CVector adjoint(const CVector& r) const = 0;
    /// A A^* (rows x rows).
    virtual CMatrix outer_gram() const = 0;
};

/// Borrows a dense matrix; the matrix must outlive the operator.
class DenseOperator final : public LinearOperator
{
public:
    explicit DenseOperator(const CMatrix& A) : A_(A) {}

    Index rows() const override { return A_.rows(); }
    Index cols() const override { return A_.cols(); }
    CVector apply(const CVector& x) const override;
    CVector adjoint(const CVector& r) const override;
    CMatrix outer_gram() const override;

private:
    const CMatrix& A_;
};

/// Largest singular value squared of A, estimated by power iteration on A^*A.
double spectral_norm_squared(const LinearOperator& A, int iterations = 100,
                             double rel_tol = 1e-10);
double spectral_norm_squared(const CMatrix& A, int iterations = 100,
                             double rel_tol = 1e-10);

} // namespace bandex

#endif // BANDEX_NUMLIN_HPP
