#pragma once

// =============================================================================
// contrakit - Small Dense Matrix
// =============================================================================
// Row-major dense matrix of doubles for the low-dimensional systems this
// library targets (state dimensions are single digits). Provides only the
// operations the analysis modules need: arithmetic, transpose, Gaussian
// solve/inverse, and norms. Eigen-style generality is intentionally out of
// scope; the numerics module builds its own eigensolver on top of this type.
// =============================================================================

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace contrakit {

class Matrix {
public:
    Matrix() = default;

    /// Zero-initialized rows x cols matrix.
    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    /// Construct from nested braces: Matrix{{1,2},{3,4}}.
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    [[nodiscard]] static Matrix identity(std::size_t n);
    [[nodiscard]] static Matrix diagonal(const std::vector<double>& d);
    [[nodiscard]] static Matrix column(const std::vector<double>& v);

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] bool square() const noexcept { return rows_ == cols_; }

    [[nodiscard]] double& operator()(std::size_t r, std::size_t c) {
        return data_[r * cols_ + c];
    }
    [[nodiscard]] double operator()(std::size_t r, std::size_t c) const {
        return data_[r * cols_ + c];
    }

    [[nodiscard]] const std::vector<double>& data() const noexcept { return data_; }

    [[nodiscard]] Matrix transpose() const;
    [[nodiscard]] Matrix operator+(const Matrix& other) const;
    [[nodiscard]] Matrix operator-(const Matrix& other) const;
    [[nodiscard]] Matrix operator*(const Matrix& other) const;
    [[nodiscard]] Matrix operator*(double s) const;

    /// Matrix-vector product.
    [[nodiscard]] std::vector<double> apply(const std::vector<double>& v) const;

    /// Symmetrized copy (A + A^T)/2.
    [[nodiscard]] Matrix symmetric_part() const;

    /// Frobenius norm.
    [[nodiscard]] double frobenius_norm() const;

    /// Largest absolute entry.
    [[nodiscard]] double max_abs() const;

    /// Relative asymmetry max|A - A^T| / max(1, max|A|); 0 for non-square.
    [[nodiscard]] double asymmetry() const;

    /// Solve A x = b by Gaussian elimination with partial pivoting.
    /// Throws InputError when the pivot collapses (singular system).
    [[nodiscard]] std::vector<double> solve(const std::vector<double>& b) const;

    /// Inverse via Gaussian elimination; throws InputError when singular.
    [[nodiscard]] Matrix inverse() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

} // namespace contrakit
