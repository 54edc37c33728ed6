#pragma once

// Small dense linear algebra kernels over plain row-major arrays.
//
// Everything in the toolkit that needs a matrix goes through this header; no
// external numerical library is linked. Sizes are tiny (stage blocks of a few
// dozen rows, condensed Hessians of a few hundred), so clarity wins over
// blocking or vectorisation.

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

namespace slmpc {

using Vector = std::vector<double>;

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);
    static Matrix diagonal(std::span<const double> d);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    Vector col(std::size_t c) const;

    std::span<const double> data() const { return data_; }
    std::span<double> data() { return data_; }

    Matrix transpose() const;
    Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;
    void set_block(std::size_t r0, std::size_t c0, const Matrix& b);

    Matrix& operator+=(const Matrix& o);
    Matrix& operator-=(const Matrix& o);
    Matrix& operator*=(double s);

    bool operator==(const Matrix& o) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);
Matrix operator*(double s, Matrix a);
Matrix operator*(const Matrix& a, const Matrix& b);
Vector operator*(const Matrix& a, std::span<const double> x);

/// y += alpha * A x
void gemv_acc(const Matrix& a, std::span<const double> x, double alpha, std::span<double> y);
/// y += alpha * A^T x
void gemv_t_acc(const Matrix& a, std::span<const double> x, double alpha, std::span<double> y);

double dot(std::span<const double> a, std::span<const double> b);
double norm_inf(std::span<const double> a);
double norm_inf(const Matrix& a);  // induced (max row sum)
double max_abs(const Matrix& a);   // entrywise
double max_abs_diff(const Matrix& a, const Matrix& b);
double max_abs_diff(std::span<const double> a, std::span<const double> b);
Vector add(std::span<const double> a, std::span<const double> b);
Vector sub(std::span<const double> a, std::span<const double> b);
Vector scaled(std::span<const double> a, double s);
bool all_finite(std::span<const double> a);
bool is_symmetric(const Matrix& a, double tol);

/// Cholesky factor L (lower) of a symmetric positive definite matrix.
class Cholesky {
public:
    /// Empty optional when a pivot is not strictly positive.
    static std::optional<Cholesky> factor(const Matrix& a);

    std::size_t size() const { return l_.rows(); }
    const Matrix& lower() const { return l_; }

    void solve_in_place(std::span<double> b) const;
    Vector solve(std::span<const double> b) const;
    /// Squared ratio of extreme diagonal entries of L; a cheap condition estimate.
    double condition_estimate() const;

private:
    Matrix l_;
};

/// LU with partial pivoting for general square systems.
class Lu {
public:
    /// Empty optional when the matrix is numerically singular.
    static std::optional<Lu> factor(const Matrix& a, double pivot_tol = 1e-13);

    Vector solve(std::span<const double> b) const;

private:
    Matrix lu_;
    std::vector<std::size_t> perm_;
};

}  // namespace slmpc
