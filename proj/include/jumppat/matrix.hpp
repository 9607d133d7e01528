#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <vector>

#include "jumppat/scalar.hpp"

namespace jumppat {

// Dense row-major matrix over a complex scalar field S, either
// std::complex<double> or ExactComplex. Values are treated as immutable once
// built, so they can be shared freely across worker threads.
template <class S>
class Matrix {
public:
    Matrix() = default;
    Matrix(Index rows, Index cols)
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows * cols), S(0)) {
        if (rows < 0 || cols < 0) throw DimensionError("negative matrix dimension");
    }
    Matrix(Index rows, Index cols, std::initializer_list<S> entries) : Matrix(rows, cols) {
        if (static_cast<Index>(entries.size()) != rows * cols)
            throw DimensionError("initializer size does not match matrix shape");
        std::copy(entries.begin(), entries.end(), data_.begin());
    }

    static Matrix identity(Index n) {
        Matrix m(n, n);
        for (Index i = 0; i < n; ++i) m(i, i) = S(1);
        return m;
    }

    Index rows() const { return rows_; }
    Index cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }
    bool empty() const { return data_.empty(); }

    S& operator()(Index i, Index j) { return data_[static_cast<std::size_t>(i * cols_ + j)]; }
    const S& operator()(Index i, Index j) const {
        return data_[static_cast<std::size_t>(i * cols_ + j)];
    }

    std::vector<S>& data() { return data_; }
    const std::vector<S>& data() const { return data_; }

    Matrix& operator+=(const Matrix& o) {
        check_same_shape(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    Matrix& operator-=(const Matrix& o) {
        check_same_shape(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }
    Matrix& operator*=(const S& s) {
        for (auto& v : data_) v *= s;
        return *this;
    }

private:
    void check_same_shape(const Matrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_) throw DimensionError("matrix shape mismatch");
    }

    Index rows_ = 0, cols_ = 0;
    std::vector<S> data_;
};

template <class S>
Matrix<S> operator+(Matrix<S> a, const Matrix<S>& b) {
    return a += b;
}
template <class S>
Matrix<S> operator-(Matrix<S> a, const Matrix<S>& b) {
    return a -= b;
}
template <class S>
Matrix<S> operator*(Matrix<S> a, const S& s) {
    return a *= s;
}
template <class S>
Matrix<S> operator*(const S& s, Matrix<S> a) {
    return a *= s;
}
template <class S>
Matrix<S> operator-(const Matrix<S>& a) {
    Matrix<S> r = a;
    return r *= S(-1);
}

template <class S>
Matrix<S> operator*(const Matrix<S>& a, const Matrix<S>& b) {
    if (a.cols() != b.rows()) throw DimensionError("matrix product shape mismatch");
    Matrix<S> c(a.rows(), b.cols());
    for (Index i = 0; i < a.rows(); ++i) {
        for (Index k = 0; k < a.cols(); ++k) {
            const S& aik = a(i, k);
            if (FieldTraits<S>::is_zero(aik)) continue;
            for (Index j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    }
    return c;
}

template <class S>
bool operator==(const Matrix<S>& a, const Matrix<S>& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && a.data() == b.data();
}

template <class S>
Matrix<S> transpose(const Matrix<S>& a) {
    Matrix<S> t(a.cols(), a.rows());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

template <class S>
Matrix<S> conjugate(const Matrix<S>& a) {
    Matrix<S> c(a.rows(), a.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j) c(i, j) = FieldTraits<S>::conjugate(a(i, j));
    return c;
}

template <class S>
Matrix<S> adjoint(const Matrix<S>& a) {
    Matrix<S> t(a.cols(), a.rows());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j) t(j, i) = FieldTraits<S>::conjugate(a(i, j));
    return t;
}

template <class S>
S trace(const Matrix<S>& a) {
    if (!a.square()) throw DimensionError("trace of non-square matrix");
    S t(0);
    for (Index i = 0; i < a.rows(); ++i) t += a(i, i);
    return t;
}

template <class S>
Matrix<S> kron(const Matrix<S>& a, const Matrix<S>& b) {
    Matrix<S> c(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j) {
            const S& aij = a(i, j);
            if (FieldTraits<S>::is_zero(aij)) continue;
            for (Index k = 0; k < b.rows(); ++k)
                for (Index l = 0; l < b.cols(); ++l)
                    c(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
        }
    return c;
}

// Column-stacking vectorization: entry (i,j) of a d x d operator sits at
// index j*d + i of the column vector. Fixed convention repo-wide.
template <class S>
Matrix<S> vectorize(const Matrix<S>& a) {
    if (!a.square()) throw DimensionError("vectorize expects a square matrix");
    const Index d = a.rows();
    Matrix<S> v(d * d, 1);
    for (Index j = 0; j < d; ++j)
        for (Index i = 0; i < d; ++i) v(j * d + i, 0) = a(i, j);
    return v;
}

template <class S>
Matrix<S> unvectorize(const Matrix<S>& v, Index dim) {
    if (v.cols() != 1 || v.rows() != dim * dim)
        throw DimensionError("unvectorize expects a length-d^2 column");
    Matrix<S> a(dim, dim);
    for (Index j = 0; j < dim; ++j)
        for (Index i = 0; i < dim; ++i) a(i, j) = v(j * dim + i, 0);
    return a;
}

// superop_left(A) * vec(rho) = vec(A rho);  realized as I (x) A.
template <class S>
Matrix<S> superop_left(const Matrix<S>& a) {
    if (!a.square()) throw DimensionError("superop_left expects a square matrix");
    return kron(Matrix<S>::identity(a.rows()), a);
}

// superop_right(A) * vec(rho) = vec(rho A);  realized as A^T (x) I.
template <class S>
Matrix<S> superop_right(const Matrix<S>& a) {
    if (!a.square()) throw DimensionError("superop_right expects a square matrix");
    return kron(transpose(a), Matrix<S>::identity(a.rows()));
}

// trace of the operator encoded in a vectorized column
template <class S>
S trace_of_vectorized(const Matrix<S>& v, Index dim) {
    if (v.cols() != 1 || v.rows() != dim * dim)
        throw DimensionError("trace_of_vectorized expects a length-d^2 column");
    S t(0);
    for (Index i = 0; i < dim; ++i) t += v(i * dim + i, 0);
    return t;
}

template <class S>
Matrix<S> hermitize(const Matrix<S>& a) {
    Matrix<S> h = a + adjoint(a);
    return h *= S(1) / S(2);
}

template <class S>
bool is_zero_matrix(const Matrix<S>& a) {
    for (const auto& v : a.data())
        if (!FieldTraits<S>::is_zero(v)) return false;
    return true;
}

inline double max_abs(const Matrix<Complex>& a) {
    double m = 0;
    for (const auto& v : a.data()) m = std::max(m, std::abs(v));
    return m;
}

inline double max_abs_diff(const Matrix<Complex>& a, const Matrix<Complex>& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionError("matrix shape mismatch");
    double m = 0;
    for (std::size_t i = 0; i < a.data().size(); ++i)
        m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

template <class S>
bool is_hermitian(const Matrix<S>& a, double tol = 1e-12) {
    if (!a.square()) return false;
    if constexpr (FieldTraits<S>::is_exact) {
        (void)tol;
        return a == adjoint(a);
    } else {
        return max_abs_diff(a, adjoint(a)) <= tol;
    }
}

template <class S>
Matrix<Complex> to_complex_matrix(const Matrix<S>& a) {
    Matrix<Complex> c(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.data().size(); ++i) c.data()[i] = to_std_complex(a.data()[i]);
    return c;
}

using CMatrix = Matrix<Complex>;
using XMatrix = Matrix<ExactComplex>;

}  // namespace jumppat
