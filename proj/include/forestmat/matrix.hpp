#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

#include "forestmat/error.hpp"
#include "forestmat/rational.hpp"

namespace forestmat {

// Dense row-major matrix over double or rational. Everything here works on
// small matrices (n is the vertex count of a digraph), so no effort is spent
// on blocking or sparsity.
template <typename T>
class matrix {
public:
    matrix() : rows_(0), cols_(0) {}
    matrix(std::size_t rows, std::size_t cols, const T& fill = T(0))
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static matrix identity(std::size_t n) {
        matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    bool operator==(const matrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }

    matrix operator+(const matrix& o) const {
        assert(rows_ == o.rows_ && cols_ == o.cols_);
        matrix r(rows_, cols_);
        for (std::size_t i = 0; i < data_.size(); ++i) r.data_[i] = data_[i] + o.data_[i];
        return r;
    }

    matrix operator-(const matrix& o) const {
        assert(rows_ == o.rows_ && cols_ == o.cols_);
        matrix r(rows_, cols_);
        for (std::size_t i = 0; i < data_.size(); ++i) r.data_[i] = data_[i] - o.data_[i];
        return r;
    }

    matrix operator*(const matrix& o) const {
        assert(cols_ == o.rows_);
        matrix r(rows_, o.cols_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t k = 0; k < cols_; ++k) {
                const T& a = (*this)(i, k);
                if (a == T(0)) continue;
                for (std::size_t j = 0; j < o.cols_; ++j) r(i, j) += a * o(k, j);
            }
        return r;
    }

    matrix operator*(const T& s) const {
        matrix r(rows_, cols_);
        for (std::size_t i = 0; i < data_.size(); ++i) r.data_[i] = data_[i] * s;
        return r;
    }

    matrix operator/(const T& s) const {
        matrix r(rows_, cols_);
        for (std::size_t i = 0; i < data_.size(); ++i) r.data_[i] = data_[i] / s;
        return r;
    }

    matrix transpose() const {
        matrix r(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
        return r;
    }

    T trace() const {
        T t(0);
        for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
        return t;
    }

    static T abs_value(const T& x) { return x < T(0) ? T(-x) : x; }

    T max_abs() const {
        T m(0);
        for (const T& x : data_) m = std::max(m, abs_value(x));
        return m;
    }

    T max_abs_diff(const matrix& o) const {
        assert(rows_ == o.rows_ && cols_ == o.cols_);
        T m(0);
        for (std::size_t i = 0; i < data_.size(); ++i)
            m = std::max(m, abs_value(data_[i] - o.data_[i]));
        return m;
    }

    // Rows/columns listed in `drop` (0-based, sorted or not) removed.
    matrix minor_excluding(const std::vector<std::size_t>& drop_rows,
                           const std::vector<std::size_t>& drop_cols) const {
        std::vector<bool> rkeep(rows_, true), ckeep(cols_, true);
        for (auto r : drop_rows) rkeep[r] = false;
        for (auto c : drop_cols) ckeep[c] = false;
        matrix out(rows_ - drop_rows.size(), cols_ - drop_cols.size());
        std::size_t ri = 0;
        for (std::size_t i = 0; i < rows_; ++i) {
            if (!rkeep[i]) continue;
            std::size_t cj = 0;
            for (std::size_t j = 0; j < cols_; ++j) {
                if (!ckeep[j]) continue;
                out(ri, cj++) = (*this)(i, j);
            }
            ++ri;
        }
        return out;
    }

    // Gauss-Jordan with partial pivoting (largest pivot for double, first
    // nonzero for exact scalars, where any nonzero pivot is fine).
    matrix inverse() const {
        assert(rows_ == cols_);
        const std::size_t n = rows_;
        matrix a(*this);
        matrix inv = identity(n);
        for (std::size_t col = 0; col < n; ++col) {
            std::size_t piv = col;
            if constexpr (scalar_traits<T>::is_exact) {
                while (piv < n && a(piv, col) == T(0)) ++piv;
                if (piv == n) throw error(errc::singular_matrix, "exact pivot vanished");
            } else {
                for (std::size_t r = col + 1; r < n; ++r)
                    if (abs_value(a(r, col)) > abs_value(a(piv, col))) piv = r;
                if (a(piv, col) == T(0))
                    throw error(errc::singular_matrix, "zero pivot");
            }
            if (piv != col) {
                for (std::size_t j = 0; j < n; ++j) {
                    std::swap(a(piv, j), a(col, j));
                    std::swap(inv(piv, j), inv(col, j));
                }
            }
            const T d = a(col, col);
            for (std::size_t j = 0; j < n; ++j) {
                a(col, j) = a(col, j) / d;
                inv(col, j) = inv(col, j) / d;
            }
            for (std::size_t r = 0; r < n; ++r) {
                if (r == col || a(r, col) == T(0)) continue;
                const T f = a(r, col);
                for (std::size_t j = 0; j < n; ++j) {
                    a(r, j) -= f * a(col, j);
                    inv(r, j) -= f * inv(col, j);
                }
            }
        }
        return inv;
    }

    T determinant() const {
        assert(rows_ == cols_);
        const std::size_t n = rows_;
        if (n == 0) return T(1);
        matrix a(*this);
        T det(1);
        for (std::size_t col = 0; col < n; ++col) {
            std::size_t piv = col;
            if constexpr (scalar_traits<T>::is_exact) {
                while (piv < n && a(piv, col) == T(0)) ++piv;
                if (piv == n) return T(0);
            } else {
                for (std::size_t r = col + 1; r < n; ++r)
                    if (abs_value(a(r, col)) > abs_value(a(piv, col))) piv = r;
                if (a(piv, col) == T(0)) return T(0);
            }
            if (piv != col) {
                for (std::size_t j = col; j < n; ++j) std::swap(a(piv, j), a(col, j));
                det = -det;
            }
            det *= a(col, col);
            for (std::size_t r = col + 1; r < n; ++r) {
                if (a(r, col) == T(0)) continue;
                const T f = a(r, col) / a(col, col);
                for (std::size_t j = col; j < n; ++j) a(r, j) -= f * a(col, j);
            }
        }
        return det;
    }

private:
    std::size_t rows_, cols_;
    std::vector<T> data_;
};

template <typename T>
matrix<double> to_double_matrix(const matrix<T>& m) {
    matrix<double> out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = to_double(m(i, j));
    return out;
}

// Singular values by one-sided Jacobi orthogonalization. Plenty for the
// rank checks on matrices of order <= a few dozen.
inline std::vector<double> singular_values(const matrix<double>& m) {
    const std::size_t rows = m.rows(), cols = m.cols();
    // work on columns of a copy; rotate column pairs until orthogonal
    std::vector<std::vector<double>> a(cols, std::vector<double>(rows));
    for (std::size_t j = 0; j < cols; ++j)
        for (std::size_t i = 0; i < rows; ++i) a[j][i] = m(i, j);
    const double eps = 1e-15;
    for (int sweep = 0; sweep < 60; ++sweep) {
        bool converged = true;
        for (std::size_t p = 0; p + 1 < cols; ++p) {
            for (std::size_t q = p + 1; q < cols; ++q) {
                double app = 0, aqq = 0, apq = 0;
                for (std::size_t i = 0; i < rows; ++i) {
                    app += a[p][i] * a[p][i];
                    aqq += a[q][i] * a[q][i];
                    apq += a[p][i] * a[q][i];
                }
                if (std::abs(apq) <= eps * std::sqrt(app * aqq) || apq == 0.0) continue;
                converged = false;
                const double zeta = (aqq - app) / (2.0 * apq);
                const double t = (zeta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < rows; ++i) {
                    const double ap = a[p][i], aq = a[q][i];
                    a[p][i] = c * ap - s * aq;
                    a[q][i] = s * ap + c * aq;
                }
            }
        }
        if (converged) break;
    }
    std::vector<double> sv(cols);
    for (std::size_t j = 0; j < cols; ++j) {
        double norm2 = 0;
        for (std::size_t i = 0; i < rows; ++i) norm2 += a[j][i] * a[j][i];
        sv[j] = std::sqrt(norm2);
    }
    std::sort(sv.begin(), sv.end(), std::greater<double>());
    return sv;
}

// Count of singular values above threshold_factor * largest.
inline std::size_t numerical_rank(const matrix<double>& m, double threshold_factor = 1e-7) {
    auto sv = singular_values(m);
    if (sv.empty() || sv[0] == 0.0) return 0;
    const double cut = threshold_factor * sv[0];
    std::size_t r = 0;
    while (r < sv.size() && sv[r] > cut) ++r;
    return r;
}

} // namespace forestmat
