#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "cmech/dual.hpp"
#include "cmech/errors.hpp"

namespace cmech {

/// Dense row-major matrix over any scalar (double or nested Dual).
template <class T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T init = T(0.0))
        : rows_(rows), cols_(cols), data_(rows * cols, init) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1.0);
        return m;
    }

    T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    std::vector<T> row(std::size_t i) const {
        return std::vector<T>(data_.begin() + i * cols_, data_.begin() + (i + 1) * cols_);
    }
    std::vector<T> col(std::size_t j) const {
        std::vector<T> c(rows_);
        for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
        return c;
    }
    void set_row(std::size_t i, std::span<const T> r) {
        for (std::size_t j = 0; j < cols_; ++j) (*this)(i, j) = r[j];
    }
    void set_col(std::size_t j, std::span<const T> c) {
        for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = c[i];
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

// ==================== basic operations ====================

template <class T>
Matrix<T> transpose(const Matrix<T>& a) {
    Matrix<T> t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

template <class T>
Matrix<T> operator*(const Matrix<T>& a, const Matrix<T>& b) {
    Matrix<T> c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const T& aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

template <class T>
Matrix<T> operator-(const Matrix<T>& a, const Matrix<T>& b) {
    Matrix<T> c = a;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) -= b(i, j);
    return c;
}

template <class T>
Matrix<T> operator+(const Matrix<T>& a, const Matrix<T>& b) {
    Matrix<T> c = a;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) += b(i, j);
    return c;
}

template <class T>
std::vector<T> operator*(const Matrix<T>& a, std::span<const T> x) {
    std::vector<T> y(a.rows(), T(0.0));
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) y[i] += a(i, j) * x[j];
    return y;
}

template <class T>
std::vector<T> operator*(const Matrix<T>& a, const std::vector<T>& x) {
    return a * std::span<const T>(x);
}

/// y = a^T x without forming the transpose.
template <class T>
std::vector<T> transpose_times(const Matrix<T>& a, std::span<const T> x) {
    std::vector<T> y(a.cols(), T(0.0));
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) y[j] += a(i, j) * x[i];
    return y;
}

template <class T>
T dot(std::span<const T> a, std::span<const T> b) {
    T s(0.0);
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}
template <class T>
T dot(const std::vector<T>& a, const std::vector<T>& b) {
    return dot(std::span<const T>(a), std::span<const T>(b));
}
template <class T>
T dot(const std::vector<T>& a, std::span<const T> b) {
    return dot(std::span<const T>(a), b);
}
template <class T>
T dot(std::span<const T> a, const std::vector<T>& b) {
    return dot(a, std::span<const T>(b));
}

template <class T>
Matrix<T> select_rows(const Matrix<T>& a, const std::vector<std::size_t>& idx) {
    Matrix<T> s(idx.size(), a.cols());
    for (std::size_t r = 0; r < idx.size(); ++r)
        for (std::size_t j = 0; j < a.cols(); ++j) s(r, j) = a(idx[r], j);
    return s;
}

template <class T>
Matrix<T> select_cols(const Matrix<T>& a, const std::vector<std::size_t>& idx) {
    Matrix<T> s(a.rows(), idx.size());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t c = 0; c < idx.size(); ++c) s(i, c) = a(i, idx[c]);
    return s;
}

template <class T>
Matrix<double> primal(const Matrix<T>& a) {
    Matrix<double> p(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) p(i, j) = primal(a(i, j));
    return p;
}

template <class T>
std::vector<double> primal(std::span<const T> v) {
    std::vector<double> p(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) p[i] = primal(v[i]);
    return p;
}
template <class T>
std::vector<double> primal(const std::vector<T>& v) {
    return primal(std::span<const T>(v));
}

template <class T, class U>
std::vector<T> lift(const std::vector<U>& v) {
    std::vector<T> out;
    out.reserve(v.size());
    for (const auto& e : v) out.emplace_back(e);
    return out;
}

double max_abs(std::span<const double> v);
inline double max_abs(const std::vector<double>& v) { return max_abs(std::span<const double>(v)); }
double norm2(std::span<const double> v);
inline double norm2(const std::vector<double>& v) { return norm2(std::span<const double>(v)); }

// ==================== LU with partial pivoting ====================

/// LU factorisation. Pivots are chosen on primal values, so derivative
/// components ride along the same elimination order as the base point.
template <class T>
class LU {
public:
    explicit LU(Matrix<T> a) : lu_(std::move(a)), perm_(lu_.rows()) {
        const std::size_t n = lu_.rows();
        if (n != lu_.cols()) throw SingularSystem("LU of a non-square matrix");
        double scale = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::abs(primal(lu_(i, j))));
        for (std::size_t i = 0; i < n; ++i) perm_[i] = i;
        for (std::size_t k = 0; k < n; ++k) {
            std::size_t piv = k;
            double best = std::abs(primal(lu_(k, k)));
            for (std::size_t i = k + 1; i < n; ++i) {
                double v = std::abs(primal(lu_(i, k)));
                if (v > best) { best = v; piv = i; }
            }
            if (best <= 1e-14 * std::max(scale, 1e-300)) throw SingularSystem("singular matrix in LU");
            if (piv != k) {
                for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(piv, j));
                std::swap(perm_[k], perm_[piv]);
                sign_ = -sign_;
            }
            for (std::size_t i = k + 1; i < n; ++i) {
                T f = lu_(i, k) / lu_(k, k);
                lu_(i, k) = f;
                for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= f * lu_(k, j);
            }
        }
    }

    std::vector<T> solve(std::span<const T> b) const {
        const std::size_t n = lu_.rows();
        std::vector<T> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            T s = b[perm_[i]];
            for (std::size_t j = 0; j < i; ++j) s -= lu_(i, j) * y[j];
            y[i] = s;
        }
        for (std::size_t ii = n; ii-- > 0;) {
            T s = y[ii];
            for (std::size_t j = ii + 1; j < n; ++j) s -= lu_(ii, j) * y[j];
            y[ii] = s / lu_(ii, ii);
        }
        return y;
    }

    Matrix<T> solve(const Matrix<T>& b) const {
        Matrix<T> x(b.rows(), b.cols());
        for (std::size_t j = 0; j < b.cols(); ++j) {
            auto c = b.col(j);
            x.set_col(j, std::span<const T>(solve(std::span<const T>(c))));
        }
        return x;
    }

    T determinant() const {
        T d(sign_);
        for (std::size_t i = 0; i < lu_.rows(); ++i) d *= lu_(i, i);
        return d;
    }

private:
    Matrix<T> lu_;
    std::vector<std::size_t> perm_;
    double sign_ = 1.0;
};

template <class T>
std::vector<T> lu_solve(const Matrix<T>& a, std::span<const T> b) {
    return LU<T>(a).solve(b);
}
template <class T>
std::vector<T> lu_solve(const Matrix<T>& a, const std::vector<T>& b) {
    return LU<T>(a).solve(std::span<const T>(b));
}
template <class T>
Matrix<T> lu_solve(const Matrix<T>& a, const Matrix<T>& b) {
    return LU<T>(a).solve(b);
}
template <class T>
Matrix<T> inverse(const Matrix<T>& a) {
    return LU<T>(a).solve(Matrix<T>::identity(a.rows()));
}

/// Determinant; returns exactly zero for numerically singular input.
template <class T>
T determinant(const Matrix<T>& a) {
    try {
        return LU<T>(a).determinant();
    } catch (const SingularSystem&) {
        return T(0.0);
    }
}

// ==================== SVD-based helpers on doubles ====================

/// Singular values in descending order.
std::vector<double> singular_values(const Matrix<double>& a);

/// Count of singular values above rel_tol * sigma_max.
std::size_t numerical_rank(const Matrix<double>& a, double rel_tol = 1e-9);

/// Orthonormal basis of ker a. Each vector's first significant component is positive.
std::vector<std::vector<double>> null_space(const Matrix<double>& a, double rel_tol = 1e-9);

/// Greedy selection of linearly independent rows in index order.
std::vector<std::size_t> independent_rows(const Matrix<double>& a, double rel_tol = 1e-9);

/// Minimum-norm least-squares solution of a x = b.
std::vector<double> pseudo_solve(const Matrix<double>& a, std::span<const double> b, double rel_tol = 1e-10);

/// Projector onto the row space of `a` (smooth in the entries while the selected rows stay independent).
template <class T>
Matrix<T> row_space_projector(const Matrix<T>& a, double rel_tol = 1e-9) {
    const std::size_t dim = a.cols();
    auto idx = independent_rows(primal(a), rel_tol);
    if (idx.empty()) return Matrix<T>(dim, dim);
    Matrix<T> s = select_rows(a, idx);
    Matrix<T> g = s * transpose(s);
    Matrix<T> ginv_s = lu_solve(g, s);
    return transpose(s) * ginv_s;
}

/// Projector onto ker a; the complement of row_space_projector.
template <class T>
Matrix<T> kernel_projector(const Matrix<T>& a, double rel_tol = 1e-9) {
    return Matrix<T>::identity(a.cols()) - row_space_projector(a, rel_tol);
}

}  // namespace cmech
