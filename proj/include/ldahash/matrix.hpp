#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace ldahash {

/// Dense row-major matrix of 64-bit floats.
class Matrix {
public:
    Matrix() = default;

    /// Zero-initialized rows x cols matrix.
    Matrix(std::size_t rows, std::size_t cols);

    /// From row-major entries; rejects non-finite values.
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

    static Matrix identity(std::size_t n);
    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }

    double* row_ptr(std::size_t i) { return entries_.data() + i * cols_; }
    const double* row_ptr(std::size_t i) const { return entries_.data() + i * cols_; }

    std::span<double> data() { return entries_; }
    std::span<const double> data() const { return entries_; }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    /// Throws NumericError naming `context` if any entry is NaN/Inf.
    void require_finite(const std::string& context) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> entries_;
};

// ---------------------------------------------------------------------------
// GEMM kernels. The unqualified versions parallelize over output rows with
// OpenMP; ldahash::serial holds the single-threaded references. Both call the
// same per-row routine, so results are bit-identical (asserted in tests).
// ---------------------------------------------------------------------------

/// C = A * B
Matrix matmul(const Matrix& a, const Matrix& b);
/// C = A^T * B
Matrix matmul_at_b(const Matrix& a, const Matrix& b);
/// C = A * B^T
Matrix matmul_a_bt(const Matrix& a, const Matrix& b);

namespace serial {
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_at_b(const Matrix& a, const Matrix& b);
Matrix matmul_a_bt(const Matrix& a, const Matrix& b);
}  // namespace serial

// ---------------------------------------------------------------------------
// Elementwise / reduction helpers.
// ---------------------------------------------------------------------------

Matrix transpose(const Matrix& a);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix scaled(const Matrix& a, double factor);
/// a += factor * b
void add_scaled_in_place(Matrix& a, const Matrix& b, double factor);

double trace(const Matrix& a);
double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);
double max_abs_diff(const Matrix& a, const Matrix& b);
/// max_ij |a_ij - a_ji|
double max_asymmetry(const Matrix& a);
bool is_symmetric(const Matrix& a, double abs_tol);

/// Mean of each row (length rows) / each column (length cols).
std::vector<double> row_means(const Matrix& a);
std::vector<double> col_means(const Matrix& a);

}  // namespace ldahash
