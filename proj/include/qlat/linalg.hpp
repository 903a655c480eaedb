#pragma once

#include <cstddef>
#include <vector>

namespace qlat {

/// Dense row-major matrix of doubles. Sized for device-scale problems
/// (a few hundred conductors at most), so everything is O(n^3) and direct.
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

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    const std::vector<double>& data() const { return data_; }

    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);

/// Max absolute column sum.
double one_norm(const Matrix& a);

/// Largest |a_ij - a_ji| relative to the largest |a_ij| (0 for empty).
double symmetry_defect(const Matrix& a);

/// LU decomposition with partial pivoting, stored in-place.
struct LuDecomposition {
    Matrix lu;
    std::vector<std::size_t> pivot;

    std::vector<double> solve(const std::vector<double>& rhs) const;
};

/// Factor a square matrix; throws NumericError on exact singularity.
LuDecomposition lu_factor(Matrix a);

/// Dense inverse via LU with partial pivoting.
Matrix invert(const Matrix& a);

/// 1-norm condition number kappa_1 = ||A||_1 * ||A^-1||_1.
double condition_1norm(const Matrix& a, const Matrix& a_inv);

} // namespace qlat
