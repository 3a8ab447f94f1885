#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

#include "fpdetect/errors.hpp"

namespace fpdetect {

/// Dense row-major matrix of doubles. Small sizes only (feature counts,
/// profile counts), so no blocking or views.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) {
        assert(i < rows_ && j < cols_);
        return data_[i * cols_ + j];
    }
    double operator()(std::size_t i, std::size_t j) const {
        assert(i < rows_ && j < cols_);
        return data_[i * cols_ + j];
    }

    const std::vector<double>& data() const { return data_; }

    std::vector<double> row(std::size_t i) const {
        return {data_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
                data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_)};
    }
    std::vector<double> col(std::size_t j) const {
        std::vector<double> c(rows_);
        for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
        return c;
    }

    Matrix transposed() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    Matrix operator*(const Matrix& o) const {
        if (cols_ != o.rows_) throw DimensionMismatchError("matrix product shape mismatch");
        Matrix r(rows_, o.cols_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t k = 0; k < cols_; ++k) {
                const double a = (*this)(i, k);
                if (a == 0.0) continue;
                for (std::size_t j = 0; j < o.cols_; ++j) r(i, j) += a * o(k, j);
            }
        return r;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (double v : data_) s += v * v;
        return std::sqrt(s);
    }

    bool is_symmetric(double tol = 1e-12) const {
        if (rows_ != cols_) return false;
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = i + 1; j < cols_; ++j)
                if (std::fabs((*this)(i, j) - (*this)(j, i)) > tol) return false;
        return true;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Gauss-Jordan inverse with partial pivoting. Throws SingularMatrixError
/// when a pivot falls below scale / cond_limit.
inline Matrix invert(const Matrix& a, double cond_limit = 1e12) {
    if (a.rows() != a.cols()) throw DimensionMismatchError("invert: matrix not square");
    const std::size_t n = a.rows();
    Matrix work = a;
    Matrix inv = Matrix::identity(n);
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::fabs(a(i, j)));
    if (scale == 0.0) throw SingularMatrixError("invert: zero matrix");
    const double pivot_min = scale / cond_limit;

    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::fabs(work(r, c)) > std::fabs(work(p, c))) p = r;
        if (std::fabs(work(p, c)) < pivot_min)
            throw SingularMatrixError("invert: matrix is singular or ill-conditioned");
        if (p != c)
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(work(p, j), work(c, j));
                std::swap(inv(p, j), inv(c, j));
            }
        const double d = work(c, c);
        for (std::size_t j = 0; j < n; ++j) {
            work(c, j) /= d;
            inv(c, j) /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            const double f = work(r, c);
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) {
                work(r, j) -= f * work(c, j);
                inv(r, j) -= f * inv(c, j);
            }
        }
    }
    return inv;
}

/// log|det| and sign via LU with partial pivoting.
struct LogDet {
    double log_abs = 0.0;
    int sign = 1; // 0 when numerically singular
};

inline LogDet log_det(const Matrix& a) {
    if (a.rows() != a.cols()) throw DimensionMismatchError("log_det: matrix not square");
    const std::size_t n = a.rows();
    Matrix work = a;
    LogDet r;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t k = c + 1; k < n; ++k)
            if (std::fabs(work(k, c)) > std::fabs(work(p, c))) p = k;
        if (work(p, c) == 0.0) return {0.0, 0};
        if (p != c) {
            for (std::size_t j = 0; j < n; ++j) std::swap(work(p, j), work(c, j));
            r.sign = -r.sign;
        }
        const double piv = work(c, c);
        if (piv < 0) r.sign = -r.sign;
        r.log_abs += std::log(std::fabs(piv));
        for (std::size_t k = c + 1; k < n; ++k) {
            const double f = work(k, c) / piv;
            if (f == 0.0) continue;
            for (std::size_t j = c; j < n; ++j) work(k, j) -= f * work(c, j);
        }
    }
    return r;
}

} // namespace fpdetect
