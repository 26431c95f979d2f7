#pragma once

#include <vector>

#include "ldahash/codes.hpp"
#include "ldahash/dataset.hpp"
#include "ldahash/matrix.hpp"
#include "ldahash/scatter.hpp"

namespace ldahash {

/// Linear discriminant hash: projection columns are generalized eigenvectors
/// of (S_w + mu I)^(-1) S_b, normalized so v^T (S_w + mu I) v = 1, plus one
/// threshold per bit.
struct LinearHashModel {
    Matrix projection;                // d x r
    std::vector<double> thresholds;   // r
    std::vector<double> eigenvalues;  // r, descending
    double mu = kDefaultMu;
    int code_bits = 0;
};

/// Solves the regularized discriminant problem by Cholesky whitening of
/// (S_w + mu I) and a symmetric eigendecomposition, keeps the top r
/// eigenvectors, and centers each projected training dimension at its median
/// (the upper middle value for even counts, so each bit is +1 on at most
/// ceil(n/2) training items). A single-class input degrades to an
/// all-zero-eigenvalue model with a warning on stderr.
LinearHashModel fit_ldah(const LabeledDataset& train, int code_bits,
                         double mu = kDefaultMu);

/// bit j of item i = +1 iff (W^T x_i)_j + t_j >= 0.
BinaryCodes encode_linear(const LinearHashModel& model, const Matrix& x);
BinaryCodes encode_linear(const LinearHashModel& model, const Matrix& x,
                          std::vector<std::int64_t> item_ids);

}  // namespace ldahash
