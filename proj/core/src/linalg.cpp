#include "slmpc/linalg.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace slmpc {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
{
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) {
            throw std::invalid_argument("Matrix: ragged initializer list");
        }
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n)
{
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

Matrix Matrix::diagonal(std::span<const double> d)
{
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        m(i, i) = d[i];
    }
    return m;
}

Vector Matrix::col(std::size_t c) const
{
    Vector v(rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        v[r] = (*this)(r, c);
    }
    return v;
}

Matrix Matrix::transpose() const
{
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) {
            t(c, r) = (*this)(r, c);
        }
    }
    return t;
}

Matrix Matrix::block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const
{
    assert(r0 + nr <= rows_ && c0 + nc <= cols_);
    Matrix b(nr, nc);
    for (std::size_t r = 0; r < nr; ++r) {
        for (std::size_t c = 0; c < nc; ++c) {
            b(r, c) = (*this)(r0 + r, c0 + c);
        }
    }
    return b;
}

void Matrix::set_block(std::size_t r0, std::size_t c0, const Matrix& b)
{
    assert(r0 + b.rows() <= rows_ && c0 + b.cols() <= cols_);
    for (std::size_t r = 0; r < b.rows(); ++r) {
        for (std::size_t c = 0; c < b.cols(); ++c) {
            (*this)(r0 + r, c0 + c) = b(r, c);
        }
    }
}

Matrix& Matrix::operator+=(const Matrix& o)
{
    if (o.rows_ != rows_ || o.cols_ != cols_) {
        throw std::invalid_argument("Matrix +=: shape mismatch");
    }
    for (std::size_t i = 0; i < data_.size(); ++i) {
        data_[i] += o.data_[i];
    }
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& o)
{
    if (o.rows_ != rows_ || o.cols_ != cols_) {
        throw std::invalid_argument("Matrix -=: shape mismatch");
    }
    for (std::size_t i = 0; i < data_.size(); ++i) {
        data_[i] -= o.data_[i];
    }
    return *this;
}

Matrix& Matrix::operator*=(double s)
{
    for (double& v : data_) {
        v *= s;
    }
    return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Matrix a, double s) { return a *= s; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b)
{
    if (a.cols() != b.rows()) {
        throw std::invalid_argument("Matrix *: inner dimension mismatch");
    }
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) {
                continue;
            }
            for (std::size_t j = 0; j < b.cols(); ++j) {
                c(i, j) += aik * b(k, j);
            }
        }
    }
    return c;
}

Vector operator*(const Matrix& a, std::span<const double> x)
{
    Vector y(a.rows(), 0.0);
    gemv_acc(a, x, 1.0, y);
    return y;
}

void gemv_acc(const Matrix& a, std::span<const double> x, double alpha, std::span<double> y)
{
    assert(x.size() == a.cols() && y.size() == a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        y[i] += alpha * dot(a.row(i), x);
    }
}

void gemv_t_acc(const Matrix& a, std::span<const double> x, double alpha, std::span<double> y)
{
    assert(x.size() == a.rows() && y.size() == a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double s = alpha * x[i];
        if (s == 0.0) {
            continue;
        }
        auto r = a.row(i);
        for (std::size_t j = 0; j < a.cols(); ++j) {
            y[j] += s * r[j];
        }
    }
}

double dot(std::span<const double> a, std::span<const double> b)
{
    assert(a.size() == b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

double norm_inf(std::span<const double> a)
{
    double m = 0.0;
    for (double v : a) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

double norm_inf(const Matrix& a)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (double v : a.row(i)) {
            s += std::abs(v);
        }
        m = std::max(m, s);
    }
    return m;
}

double max_abs(const Matrix& a) { return norm_inf(a.data()); }

double max_abs_diff(const Matrix& a, const Matrix& b)
{
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        return std::numeric_limits<double>::infinity();
    }
    return max_abs_diff(a.data(), b.data());
}

double max_abs_diff(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size()) {
        return std::numeric_limits<double>::infinity();
    }
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a[i] - b[i]));
    }
    return m;
}

Vector add(std::span<const double> a, std::span<const double> b)
{
    assert(a.size() == b.size());
    Vector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        r[i] = a[i] + b[i];
    }
    return r;
}

Vector sub(std::span<const double> a, std::span<const double> b)
{
    assert(a.size() == b.size());
    Vector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        r[i] = a[i] - b[i];
    }
    return r;
}

Vector scaled(std::span<const double> a, double s)
{
    Vector r(a.begin(), a.end());
    for (double& v : r) {
        v *= s;
    }
    return r;
}

bool all_finite(std::span<const double> a)
{
    return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

bool is_symmetric(const Matrix& a, double tol)
{
    if (a.rows() != a.cols()) {
        return false;
    }
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = i + 1; j < a.cols(); ++j) {
            if (std::abs(a(i, j) - a(j, i)) > tol) {
                return false;
            }
        }
    }
    return true;
}

std::optional<Cholesky> Cholesky::factor(const Matrix& a)
{
    if (a.rows() != a.cols()) {
        return std::nullopt;
    }
    const std::size_t n = a.rows();
    Cholesky f;
    f.l_ = Matrix(n, n);
    Matrix& l = f.l_;
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) {
            d -= l(j, k) * l(j, k);
        }
        if (!(d > 0.0) || !std::isfinite(d)) {
            return std::nullopt;
        }
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) {
                s -= l(i, k) * l(j, k);
            }
            l(i, j) = s / ljj;
        }
    }
    return f;
}

void Cholesky::solve_in_place(std::span<double> b) const
{
    const std::size_t n = l_.rows();
    assert(b.size() == n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) {
            s -= l_(i, k) * b[k];
        }
        b[i] = s / l_(i, i);
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) {
            s -= l_(k, i) * b[k];
        }
        b[i] = s / l_(i, i);
    }
}

Vector Cholesky::solve(std::span<const double> b) const
{
    Vector x(b.begin(), b.end());
    solve_in_place(x);
    return x;
}

double Cholesky::condition_estimate() const
{
    if (l_.rows() == 0) {
        return 1.0;
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (std::size_t i = 0; i < l_.rows(); ++i) {
        lo = std::min(lo, l_(i, i));
        hi = std::max(hi, l_(i, i));
    }
    const double r = hi / lo;
    return r * r;
}

std::optional<Lu> Lu::factor(const Matrix& a, double pivot_tol)
{
    if (a.rows() != a.cols()) {
        return std::nullopt;
    }
    const std::size_t n = a.rows();
    Lu f;
    f.lu_ = a;
    f.perm_.resize(n);
    Matrix& m = f.lu_;
    const double scale = std::max(1.0, max_abs(a));
    for (std::size_t i = 0; i < n; ++i) {
        f.perm_[i] = i;
    }
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        double best = std::abs(m(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            if (std::abs(m(i, k)) > best) {
                best = std::abs(m(i, k));
                p = i;
            }
        }
        if (!(best > pivot_tol * scale)) {
            return std::nullopt;
        }
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(m(k, j), m(p, j));
            }
            std::swap(f.perm_[k], f.perm_[p]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double factor = m(i, k) / m(k, k);
            m(i, k) = factor;
            if (factor == 0.0) {
                continue;
            }
            for (std::size_t j = k + 1; j < n; ++j) {
                m(i, j) -= factor * m(k, j);
            }
        }
    }
    return f;
}

Vector Lu::solve(std::span<const double> b) const
{
    const std::size_t n = lu_.rows();
    assert(b.size() == n);
    Vector x(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = b[perm_[i]];
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < i; ++k) {
            x[i] -= lu_(i, k) * x[k];
        }
    }
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t k = i + 1; k < n; ++k) {
            x[i] -= lu_(i, k) * x[k];
        }
        x[i] /= lu_(i, i);
    }
    return x;
}

}  // namespace slmpc
