#include "contrakit/matrix.hpp"

#include "contrakit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace contrakit {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows.begin() == rows.end() ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& row : rows) {
        if (row.size() != cols_) {
            throw InputError("Matrix initializer rows have unequal lengths");
        }
        data_.insert(data_.end(), row.begin(), row.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::diagonal(const std::vector<double>& d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

Matrix Matrix::column(const std::vector<double>& v) {
    Matrix m(v.size(), 1);
    for (std::size_t i = 0; i < v.size(); ++i) m(i, 0) = v[i];
    return m;
}

Matrix Matrix::transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

Matrix Matrix::operator+(const Matrix& other) const {
    if (rows_ != other.rows_ || cols_ != other.cols_) {
        throw InputError("Matrix addition: dimension mismatch");
    }
    Matrix out(rows_, cols_);
    for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = data_[i] + other.data_[i];
    return out;
}

Matrix Matrix::operator-(const Matrix& other) const {
    if (rows_ != other.rows_ || cols_ != other.cols_) {
        throw InputError("Matrix subtraction: dimension mismatch");
    }
    Matrix out(rows_, cols_);
    for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = data_[i] - other.data_[i];
    return out;
}

Matrix Matrix::operator*(const Matrix& other) const {
    if (cols_ != other.rows_) {
        throw InputError("Matrix product: dimension mismatch");
    }
    Matrix out(rows_, other.cols_);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t k = 0; k < cols_; ++k) {
            const double a = (*this)(r, k);
            if (a == 0.0) continue;
            for (std::size_t c = 0; c < other.cols_; ++c) {
                out(r, c) += a * other(k, c);
            }
        }
    }
    return out;
}

Matrix Matrix::operator*(double s) const {
    Matrix out(rows_, cols_);
    for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = data_[i] * s;
    return out;
}

std::vector<double> Matrix::apply(const std::vector<double>& v) const {
    if (v.size() != cols_) {
        throw InputError("Matrix apply: dimension mismatch");
    }
    std::vector<double> out(rows_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < cols_; ++c) acc += (*this)(r, c) * v[c];
        out[r] = acc;
    }
    return out;
}

Matrix Matrix::symmetric_part() const {
    if (!square()) throw InputError("symmetric_part requires a square matrix");
    Matrix out(rows_, cols_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c)
            out(r, c) = 0.5 * ((*this)(r, c) + (*this)(c, r));
    return out;
}

double Matrix::frobenius_norm() const {
    double acc = 0.0;
    for (double v : data_) acc += v * v;
    return std::sqrt(acc);
}

double Matrix::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::fabs(v));
    return m;
}

double Matrix::asymmetry() const {
    if (!square()) return 0.0;
    double worst = 0.0;
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c)
            worst = std::max(worst, std::fabs((*this)(r, c) - (*this)(c, r)));
    return worst / std::max(1.0, max_abs());
}

std::vector<double> Matrix::solve(const std::vector<double>& b) const {
    if (!square() || b.size() != rows_) {
        throw InputError("Matrix solve: dimension mismatch");
    }
    const std::size_t n = rows_;
    Matrix a = *this;
    std::vector<double> x = b;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::fabs(a(r, col)) > std::fabs(a(pivot, col))) pivot = r;
        }
        const double pv = a(pivot, col);
        if (std::fabs(pv) < 1e-300) {
            throw InputError("Matrix solve: singular system (zero pivot at column " +
                             std::to_string(col) + ")");
        }
        if (pivot != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a(pivot, c), a(col, c));
            std::swap(x[pivot], x[col]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double factor = a(r, col) / a(col, col);
            if (factor == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a(r, c) -= factor * a(col, c);
            x[r] -= factor * x[col];
        }
    }
    for (std::size_t ri = n; ri-- > 0;) {
        double acc = x[ri];
        for (std::size_t c = ri + 1; c < n; ++c) acc -= a(ri, c) * x[c];
        x[ri] = acc / a(ri, ri);
    }
    return x;
}

Matrix Matrix::inverse() const {
    if (!square()) throw InputError("Matrix inverse requires a square matrix");
    const std::size_t n = rows_;
    Matrix inv(n, n);
    for (std::size_t col = 0; col < n; ++col) {
        std::vector<double> e(n, 0.0);
        e[col] = 1.0;
        std::vector<double> x = solve(e);
        for (std::size_t r = 0; r < n; ++r) inv(r, col) = x[r];
    }
    return inv;
}

} // namespace contrakit
