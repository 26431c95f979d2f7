#include "ldahash/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "ldahash/errors.hpp"

#if defined(__GNUC__)
#define LDAHASH_NOINLINE __attribute__((noinline))
#else
#define LDAHASH_NOINLINE
#endif

namespace ldahash {

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), entries_(rows * cols, 0.0) {
    if (rows == 0 || cols == 0) {
        throw DimensionError("matrix dimensions must be at least 1x1");
    }
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    if (rows == 0 || cols == 0) {
        throw DimensionError("matrix dimensions must be at least 1x1");
    }
    if (entries_.size() != rows * cols) {
        throw DimensionError("entry count does not match rows*cols");
    }
    require_finite("matrix construction");
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r > 0 ? rows.begin()->size() : 0;
    std::vector<double> entries;
    entries.reserve(r * c);
    for (const auto& row : rows) {
        if (row.size() != c) throw DimensionError("ragged row in matrix literal");
        entries.insert(entries.end(), row.begin(), row.end());
    }
    return Matrix(r, c, std::move(entries));
}

void Matrix::require_finite(const std::string& context) const {
    for (double v : entries_) {
        if (!std::isfinite(v)) {
            throw NumericError("non-finite value in " + context);
        }
    }
}

namespace {

// Per-row kernels shared by the parallel and serial entry points. noinline
// keeps one code path so both variants produce bit-identical results.

// out_row[j] = sum_k a_row[k] * b(k, j)
LDAHASH_NOINLINE void row_a_b(const double* a_row, const Matrix& b, double* out_row) {
    const std::size_t k_count = b.rows();
    const std::size_t n = b.cols();
    std::fill(out_row, out_row + n, 0.0);
    for (std::size_t k = 0; k < k_count; ++k) {
        const double a_ik = a_row[k];
        const double* b_row = b.row_ptr(k);
        for (std::size_t j = 0; j < n; ++j) {
            out_row[j] += a_ik * b_row[j];
        }
    }
}

// out_row[j] = sum_k a(k, i) * b(k, j)   (column i of a)
LDAHASH_NOINLINE void row_at_b(const Matrix& a, std::size_t i, const Matrix& b,
                               double* out_row) {
    const std::size_t k_count = a.rows();
    const std::size_t n = b.cols();
    std::fill(out_row, out_row + n, 0.0);
    for (std::size_t k = 0; k < k_count; ++k) {
        const double a_ki = a(k, i);
        const double* b_row = b.row_ptr(k);
        for (std::size_t j = 0; j < n; ++j) {
            out_row[j] += a_ki * b_row[j];
        }
    }
}

// out_row[j] = dot(a_row, b_row_j)
LDAHASH_NOINLINE void row_a_bt(const double* a_row, const Matrix& b, double* out_row) {
    const std::size_t n = b.rows();
    const std::size_t k_count = b.cols();
    for (std::size_t j = 0; j < n; ++j) {
        const double* b_row = b.row_ptr(j);
        double acc = 0.0;
        for (std::size_t k = 0; k < k_count; ++k) {
            acc += a_row[k] * b_row[k];
        }
        out_row[j] = acc;
    }
}

void check_matmul_dims(std::size_t inner_a, std::size_t inner_b, const char* what) {
    if (inner_a != inner_b) {
        throw DimensionError(std::string("inner dimensions disagree in ") + what);
    }
}

}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
    check_matmul_dims(a.cols(), b.rows(), "matmul");
    Matrix c(a.rows(), b.cols());
    const std::int64_t m = static_cast<std::int64_t>(a.rows());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < m; ++i) {
        row_a_b(a.row_ptr(static_cast<std::size_t>(i)), b,
                c.row_ptr(static_cast<std::size_t>(i)));
    }
    return c;
}

Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
    check_matmul_dims(a.rows(), b.rows(), "matmul_at_b");
    Matrix c(a.cols(), b.cols());
    const std::int64_t m = static_cast<std::int64_t>(a.cols());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < m; ++i) {
        row_at_b(a, static_cast<std::size_t>(i), b, c.row_ptr(static_cast<std::size_t>(i)));
    }
    return c;
}

Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
    check_matmul_dims(a.cols(), b.cols(), "matmul_a_bt");
    Matrix c(a.rows(), b.rows());
    const std::int64_t m = static_cast<std::int64_t>(a.rows());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < m; ++i) {
        row_a_bt(a.row_ptr(static_cast<std::size_t>(i)), b,
                 c.row_ptr(static_cast<std::size_t>(i)));
    }
    return c;
}

namespace serial {

Matrix matmul(const Matrix& a, const Matrix& b) {
    check_matmul_dims(a.cols(), b.rows(), "matmul");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        row_a_b(a.row_ptr(i), b, c.row_ptr(i));
    }
    return c;
}

Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
    check_matmul_dims(a.rows(), b.rows(), "matmul_at_b");
    Matrix c(a.cols(), b.cols());
    for (std::size_t i = 0; i < a.cols(); ++i) {
        row_at_b(a, i, b, c.row_ptr(i));
    }
    return c;
}

Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
    check_matmul_dims(a.cols(), b.cols(), "matmul_a_bt");
    Matrix c(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        row_a_bt(a.row_ptr(i), b, c.row_ptr(i));
    }
    return c;
}

}  // namespace serial

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            t(j, i) = a(i, j);
        }
    }
    return t;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw DimensionError("shape mismatch in matrix addition");
    Matrix c = a;
    auto out = c.data();
    auto rhs = b.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += rhs[i];
    return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw DimensionError("shape mismatch in matrix subtraction");
    Matrix c = a;
    auto out = c.data();
    auto rhs = b.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= rhs[i];
    return c;
}

Matrix scaled(const Matrix& a, double factor) {
    Matrix c = a;
    for (double& v : c.data()) v *= factor;
    return c;
}

void add_scaled_in_place(Matrix& a, const Matrix& b, double factor) {
    if (!a.same_shape(b)) throw DimensionError("shape mismatch in add_scaled_in_place");
    auto out = a.data();
    auto rhs = b.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += factor * rhs[i];
}

double trace(const Matrix& a) {
    if (a.rows() != a.cols()) throw DimensionError("trace of non-square matrix");
    double t = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) t += a(i, i);
    return t;
}

double frobenius_norm(const Matrix& a) {
    double s = 0.0;
    for (double v : a.data()) s += v * v;
    return std::sqrt(s);
}

double max_abs(const Matrix& a) {
    double m = 0.0;
    for (double v : a.data()) m = std::max(m, std::abs(v));
    return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw DimensionError("shape mismatch in max_abs_diff");
    double m = 0.0;
    auto lhs = a.data();
    auto rhs = b.data();
    for (std::size_t i = 0; i < lhs.size(); ++i) {
        m = std::max(m, std::abs(lhs[i] - rhs[i]));
    }
    return m;
}

double max_asymmetry(const Matrix& a) {
    if (a.rows() != a.cols()) throw DimensionError("asymmetry of non-square matrix");
    double m = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = i + 1; j < a.cols(); ++j) {
            m = std::max(m, std::abs(a(i, j) - a(j, i)));
        }
    }
    return m;
}

bool is_symmetric(const Matrix& a, double abs_tol) {
    return a.rows() == a.cols() && max_asymmetry(a) <= abs_tol;
}

std::vector<double> row_means(const Matrix& a) {
    std::vector<double> means(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* row = a.row_ptr(i);
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) s += row[j];
        means[i] = s / static_cast<double>(a.cols());
    }
    return means;
}

std::vector<double> col_means(const Matrix& a) {
    std::vector<double> means(a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* row = a.row_ptr(i);
        for (std::size_t j = 0; j < a.cols(); ++j) means[j] += row[j];
    }
    for (double& v : means) v /= static_cast<double>(a.rows());
    return means;
}

}  // namespace ldahash
