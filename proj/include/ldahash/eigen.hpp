#pragma once

#include <vector>

#include "ldahash/matrix.hpp"

namespace ldahash {

struct EigenResult {
    std::vector<double> eigenvalues;  // descending
    Matrix eigenvectors;              // orthonormal columns, same order
};

/// Symmetric eigendecomposition by cyclic Jacobi rotations. Convergence when
/// the off-diagonal norm drops below 1e-12 * ||A||_F, capped at 100 sweeps.
/// Eigenvalues come back descending; each eigenvector is sign-fixed so its
/// first nonzero component is positive.
EigenResult sym_eig(const Matrix& a);

/// Lower-triangular L with L * L^T = A. Throws NotPositiveDefiniteError
/// naming the failing pivot.
Matrix cholesky(const Matrix& a);

/// Solves A * X = B for SPD A via Cholesky.
Matrix solve_spd(const Matrix& a, const Matrix& b);

/// Solves L * X = B (L lower triangular).
Matrix solve_lower(const Matrix& l, const Matrix& b);

/// Solves L^T * X = B (L lower triangular).
Matrix solve_lower_transposed(const Matrix& l, const Matrix& b);

/// (A)^(-1/2) via sym_eig, eigenvalues mapped to 1/sqrt(lambda). Requires
/// every eigenvalue positive; throws SingularityError otherwise.
Matrix spd_inverse_sqrt(const Matrix& a);

}  // namespace ldahash
