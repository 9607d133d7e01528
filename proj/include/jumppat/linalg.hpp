#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "jumppat/matrix.hpp"

namespace jumppat {

inline Eigen::MatrixXcd to_eigen(const CMatrix& a) {
    Eigen::MatrixXcd m(a.rows(), a.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j) m(i, j) = a(i, j);
    return m;
}

inline CMatrix from_eigen(const Eigen::MatrixXcd& m) {
    CMatrix a(m.rows(), m.cols());
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) a(i, j) = m(i, j);
    return a;
}

// Eigendecomposition with bi-orthonormalized left/right eigenvectors:
// column j of `right` is u_j, row j of `left` is v_j, and left * right = I.
// When the eigenvector matrix is ill-conditioned beyond cond_max the matrix is
// reported as non-diagonalizable and only eigenvalues are populated.
struct SpectralData {
    std::vector<Complex> eigenvalues;
    CMatrix right;
    CMatrix left;
    bool diagonalizable = false;
    double eigvec_condition = std::numeric_limits<double>::infinity();
};

inline SpectralData eig(const CMatrix& m, double cond_max = Tolerances{}.cond_max) {
    if (!m.square()) throw DimensionError("eig expects a square matrix");
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(to_eigen(m), true);
    if (solver.info() != Eigen::Success)
        throw NumericError("eigendecomposition did not converge");
    SpectralData out;
    const auto& ev = solver.eigenvalues();
    out.eigenvalues.assign(ev.data(), ev.data() + ev.size());

    const Eigen::MatrixXcd v = solver.eigenvectors();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(v);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    out.eigvec_condition = smin > 0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
    if (!(out.eigvec_condition <= cond_max)) return out;  // defective at tolerance

    out.right = from_eigen(v);
    out.left = from_eigen(v.partialPivLu().solve(Eigen::MatrixXcd::Identity(v.rows(), v.cols())));
    out.diagonalizable = true;
    return out;
}

inline CMatrix inverse(const CMatrix& m) {
    if (!m.square()) throw DimensionError("inverse expects a square matrix");
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(to_eigen(m));
    if (!lu.isInvertible()) throw SingularMatrixError("matrix is numerically singular");
    return from_eigen(lu.inverse());
}

inline Index numeric_rank(const CMatrix& m, double tol_rank = Tolerances{}.tol_rank) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(to_eigen(m));
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return 0;
    Index r = 0;
    for (Index i = 0; i < sv.size(); ++i)
        if (sv(i) > tol_rank * sv(0)) ++r;
    return r;
}

// Extracts the unique trace-one Hermitian operator spanning the kernel of a
// d^2 x d^2 superoperator. The kernel vector's arbitrary global phase is
// rotated away using its trace before Hermitizing.
inline CMatrix null_vector(const CMatrix& m, double tol_rank = Tolerances{}.tol_rank) {
    if (!m.square()) throw DimensionError("null_vector expects a square matrix");
    const Index n = m.rows();
    const Index d = static_cast<Index>(std::llround(std::sqrt(double(n))));
    if (d * d != n) throw DimensionError("null_vector expects a d^2 x d^2 matrix");

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(to_eigen(m), Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cutoff = tol_rank * (sv.size() ? std::max(sv(0), 1.0) : 1.0);
    Index kernel_dim = 0;
    for (Index i = 0; i < sv.size(); ++i)
        if (sv(i) <= cutoff) ++kernel_dim;
    if (kernel_dim != 1)
        throw DegeneracyError("kernel dimension is " + std::to_string(kernel_dim) +
                              ", expected 1 (degenerate steady state?)");
    Eigen::VectorXcd k = svd.matrixV().col(n - 1);

    CMatrix vec(n, 1);
    for (Index i = 0; i < n; ++i) vec(i, 0) = k(i);
    CMatrix op = unvectorize(vec, d);
    Complex t = trace(op);
    if (std::abs(t) < tol_rank)
        throw DegeneracyError("kernel vector has vanishing trace");
    op *= std::conj(t) / std::abs(t);  // make the trace real and positive
    op = hermitize(op);
    op *= Complex(1.0 / trace(op).real(), 0.0);
    return op;
}

inline double min_hermitian_eigenvalue(const CMatrix& a) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(to_eigen(hermitize(a)));
    if (solver.info() != Eigen::Success)
        throw NumericError("Hermitian eigendecomposition did not converge");
    return solver.eigenvalues()(0);
}

// Half the sum of singular values of (a - b); evaluated through the Hermitian
// spectrum of the Hermitized difference.
inline double trace_distance(const CMatrix& a, const CMatrix& b) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(to_eigen(hermitize(a - b)));
    if (solver.info() != Eigen::Success)
        throw NumericError("Hermitian eigendecomposition did not converge");
    return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

inline bool is_density(const CMatrix& a, double tol_psd = Tolerances{}.tol_psd,
                       double tol_trace = 1e-10) {
    return a.square() && is_hermitian(a, tol_trace) &&
           std::abs(trace(a).real() - 1.0) <= tol_trace &&
           min_hermitian_eigenvalue(a) >= -tol_psd;
}

// ---- exact field ----------------------------------------------------------

// Gauss-Jordan elimination over the Gaussian rationals. Pivots are chosen as
// the first exactly nonzero entry in the column, so the result is
// deterministic and exact: M * exact_inverse(M) is the identity, entrywise.
inline XMatrix exact_inverse(const XMatrix& m) {
    if (!m.square()) throw DimensionError("exact_inverse expects a square matrix");
    const Index n = m.rows();
    XMatrix a = m;
    XMatrix inv = XMatrix::identity(n);
    for (Index col = 0; col < n; ++col) {
        Index pivot = -1;
        for (Index r = col; r < n; ++r) {
            if (!a(r, col).is_zero()) {
                pivot = r;
                break;
            }
        }
        if (pivot < 0) throw SingularMatrixError("exact matrix is singular");
        if (pivot != col) {
            for (Index j = 0; j < n; ++j) {
                std::swap(a(pivot, j), a(col, j));
                std::swap(inv(pivot, j), inv(col, j));
            }
        }
        const ExactComplex p = a(col, col);
        for (Index j = 0; j < n; ++j) {
            a(col, j) /= p;
            inv(col, j) /= p;
        }
        for (Index r = 0; r < n; ++r) {
            if (r == col || a(r, col).is_zero()) continue;
            const ExactComplex f = a(r, col);
            for (Index j = 0; j < n; ++j) {
                a(r, j) -= f * a(col, j);
                inv(r, j) -= f * inv(col, j);
            }
        }
    }
    return inv;
}

namespace detail {

// Reduced row echelon form in place; returns the pivot column of each pivot row.
inline std::vector<Index> exact_rref(XMatrix& a) {
    std::vector<Index> pivots;
    Index row = 0;
    for (Index col = 0; col < a.cols() && row < a.rows(); ++col) {
        Index pivot = -1;
        for (Index r = row; r < a.rows(); ++r) {
            if (!a(r, col).is_zero()) {
                pivot = r;
                break;
            }
        }
        if (pivot < 0) continue;
        if (pivot != row)
            for (Index j = 0; j < a.cols(); ++j) std::swap(a(pivot, j), a(row, j));
        const ExactComplex p = a(row, col);
        for (Index j = col; j < a.cols(); ++j) a(row, j) /= p;
        for (Index r = 0; r < a.rows(); ++r) {
            if (r == row || a(r, col).is_zero()) continue;
            const ExactComplex f = a(r, col);
            for (Index j = col; j < a.cols(); ++j) a(r, j) -= f * a(row, j);
        }
        pivots.push_back(col);
        ++row;
    }
    return pivots;
}

}  // namespace detail

inline Index exact_rank(const XMatrix& m) {
    XMatrix a = m;
    return static_cast<Index>(detail::exact_rref(a).size());
}

// Basis of the exact kernel, one n x 1 column per free variable.
inline std::vector<XMatrix> exact_kernel(const XMatrix& m) {
    XMatrix a = m;
    const std::vector<Index> pivots = detail::exact_rref(a);
    std::vector<bool> is_pivot(static_cast<std::size_t>(a.cols()), false);
    for (Index c : pivots) is_pivot[static_cast<std::size_t>(c)] = true;
    std::vector<XMatrix> basis;
    for (Index free = 0; free < a.cols(); ++free) {
        if (is_pivot[static_cast<std::size_t>(free)]) continue;
        XMatrix v(a.cols(), 1);
        v(free, 0) = ExactComplex(1);
        for (std::size_t r = 0; r < pivots.size(); ++r)
            v(pivots[r], 0) = -a(static_cast<Index>(r), free);
        basis.push_back(std::move(v));
    }
    return basis;
}

// Exact analogue of the float null_vector: one-dimensional kernel, Hermitized
// and normalized to unit trace, all in the rational field.
inline XMatrix null_vector(const XMatrix& m) {
    if (!m.square()) throw DimensionError("null_vector expects a square matrix");
    const Index n = m.rows();
    const Index d = static_cast<Index>(std::llround(std::sqrt(double(n))));
    if (d * d != n) throw DimensionError("null_vector expects a d^2 x d^2 matrix");
    std::vector<XMatrix> kernel = exact_kernel(m);
    if (kernel.size() != 1)
        throw DegeneracyError("exact kernel dimension is " + std::to_string(kernel.size()) +
                              ", expected 1");
    XMatrix op = hermitize(unvectorize(kernel[0], d));
    ExactComplex t = trace(op);
    if (t.is_zero()) throw DegeneracyError("exact kernel vector has vanishing trace");
    for (auto& v : op.data()) v /= t;
    return op;
}

}  // namespace jumppat
