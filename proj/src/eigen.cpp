#include "ldahash/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ldahash/errors.hpp"

namespace ldahash {

namespace {

constexpr double kSymmetryTolerance = 1e-9;
constexpr int kMaxSweeps = 100;

void require_square_symmetric(const Matrix& a, const char* op) {
    if (a.rows() != a.cols()) {
        throw DimensionError(std::string(op) + ": matrix is not square");
    }
    const double asym = max_asymmetry(a);
    if (asym > kSymmetryTolerance) {
        throw DimensionError(std::string(op) + ": matrix is asymmetric (max |a_ij - a_ji| = " +
                             std::to_string(asym) + ")");
    }
}

double off_diagonal_norm(const Matrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            if (i != j) s += a(i, j) * a(i, j);
        }
    }
    return std::sqrt(s);
}

}  // namespace

EigenResult sym_eig(const Matrix& input) {
    require_square_symmetric(input, "sym_eig");
    const std::size_t n = input.rows();

    // Work on an exactly symmetric copy so rotations preserve symmetry.
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            a(i, j) = 0.5 * (input(i, j) + input(j, i));
        }
    }
    Matrix v = Matrix::identity(n);

    const double threshold = 1e-12 * frobenius_norm(a);
    bool converged = false;
    double off = 0.0;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        off = off_diagonal_norm(a);
        if (off <= threshold) {
            converged = true;
            break;
        }
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double app = a(p, p);
                const double aqq = a(q, q);
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);

                a(p, p) = app - t * apq;
                a(q, q) = aqq + t * apq;
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    if (k == p || k == q) continue;
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = akp - s * (akq + tau * akp);
                    a(p, k) = a(k, p);
                    a(k, q) = akq + s * (akp - tau * akq);
                    a(q, k) = a(k, q);
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = vkp - s * (vkq + tau * vkp);
                    v(k, q) = vkq + s * (vkp - tau * vkq);
                }
            }
        }
    }
    if (!converged && (off = off_diagonal_norm(a)) > threshold) {
        throw ConvergenceError("sym_eig: Jacobi sweeps exhausted, off-diagonal norm " +
                                   std::to_string(off),
                               off);
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&a](std::size_t lhs, std::size_t rhs) {
        return a(lhs, lhs) > a(rhs, rhs);
    });

    EigenResult result;
    result.eigenvalues.resize(n);
    result.eigenvectors = Matrix(n, n);
    for (std::size_t out = 0; out < n; ++out) {
        const std::size_t src = order[out];
        result.eigenvalues[out] = a(src, src);
        double sign = 1.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double value = v(k, src);
            if (value != 0.0) {
                sign = value > 0.0 ? 1.0 : -1.0;
                break;
            }
        }
        for (std::size_t k = 0; k < n; ++k) {
            result.eigenvectors(k, out) = sign * v(k, src);
        }
    }
    return result;
}

Matrix cholesky(const Matrix& a) {
    require_square_symmetric(a, "cholesky");
    const std::size_t n = a.rows();
    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double diag = a(j, j);
        for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
        if (diag <= 0.0) {
            throw NotPositiveDefiniteError(
                "cholesky: non-positive pivot at index " + std::to_string(j), j);
        }
        const double ljj = std::sqrt(diag);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double sum = a(i, j);
            for (std::size_t k = 0; k < j; ++k) sum -= l(i, k) * l(j, k);
            l(i, j) = sum / ljj;
        }
    }
    return l;
}

Matrix solve_lower(const Matrix& l, const Matrix& b) {
    if (l.rows() != l.cols()) throw DimensionError("solve_lower: L is not square");
    if (l.rows() != b.rows()) throw DimensionError("solve_lower: row counts disagree");
    const std::size_t n = l.rows();
    Matrix x = b;
    for (std::size_t col = 0; col < b.cols(); ++col) {
        for (std::size_t i = 0; i < n; ++i) {
            double sum = x(i, col);
            for (std::size_t k = 0; k < i; ++k) sum -= l(i, k) * x(k, col);
            x(i, col) = sum / l(i, i);
        }
    }
    return x;
}

Matrix solve_lower_transposed(const Matrix& l, const Matrix& b) {
    if (l.rows() != l.cols()) throw DimensionError("solve_lower_transposed: L is not square");
    if (l.rows() != b.rows()) {
        throw DimensionError("solve_lower_transposed: row counts disagree");
    }
    const std::size_t n = l.rows();
    Matrix x = b;
    for (std::size_t col = 0; col < b.cols(); ++col) {
        for (std::size_t ii = n; ii > 0; --ii) {
            const std::size_t i = ii - 1;
            double sum = x(i, col);
            for (std::size_t k = i + 1; k < n; ++k) sum -= l(k, i) * x(k, col);
            x(i, col) = sum / l(i, i);
        }
    }
    return x;
}

Matrix solve_spd(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw DimensionError("solve_spd: row counts disagree");
    const Matrix l = cholesky(a);
    return solve_lower_transposed(l, solve_lower(l, b));
}

Matrix spd_inverse_sqrt(const Matrix& a) {
    EigenResult eig = sym_eig(a);
    const std::size_t n = a.rows();
    for (double lambda : eig.eigenvalues) {
        if (lambda <= 0.0) {
            throw SingularityError("spd_inverse_sqrt: eigenvalue " + std::to_string(lambda) +
                                   " is not positive");
        }
    }
    // V * diag(lambda^(-1/2)) * V^T
    Matrix scaled_v = eig.eigenvectors;
    for (std::size_t j = 0; j < n; ++j) {
        const double f = 1.0 / std::sqrt(eig.eigenvalues[j]);
        for (std::size_t i = 0; i < n; ++i) scaled_v(i, j) *= f;
    }
    return matmul_a_bt(scaled_v, eig.eigenvectors);
}

}  // namespace ldahash
