#include "ldahash/ldah.hpp"

#include <algorithm>
#include <iostream>
#include <numeric>

#include "ldahash/eigen.hpp"
#include "ldahash/errors.hpp"

namespace ldahash {

namespace {

// Upper middle value for even counts: thresholding at it leaves each bit +1
// on at most ceil(n/2) training items, and refits stay deterministic.
double median_threshold(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    return values[values.size() / 2];
}

}  // namespace

LinearHashModel fit_ldah(const LabeledDataset& train, int code_bits, double mu) {
    train.validate();
    const std::size_t d = train.dim();
    if (code_bits < 1 || static_cast<std::size_t>(code_bits) > d) {
        throw DimensionError("fit_ldah: code_bits must be in [1, feature dim]");
    }
    if (!(mu > 0.0)) {
        throw ValidationError("fit_ldah: mu must be positive");
    }
    if (train.class_count == 1) {
        std::cerr << "fit_ldah: single-class training set, between-class scatter is zero\n";
    }

    const ScatterSet scatters = scatter_direct(train, mu);
    Matrix regularized_within = scatters.within;
    for (std::size_t i = 0; i < d; ++i) regularized_within(i, i) += mu;

    // Whiten: C = L^-1 S_b L^-T, then the symmetric eigenproblem.
    const Matrix chol_lower = cholesky(regularized_within);
    const Matrix half = solve_lower(chol_lower, scatters.between);       // L^-1 S_b
    Matrix whitened = transpose(solve_lower(chol_lower, transpose(half)));  // (L^-1 (L^-1 S_b)^T)^T
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i + 1; j < d; ++j) {
            const double v = 0.5 * (whitened(i, j) + whitened(j, i));
            whitened(i, j) = v;
            whitened(j, i) = v;
        }
    }
    const EigenResult eig = sym_eig(whitened);

    // Back-transform the leading eigenvectors: w = L^-T u, which keeps
    // w^T (S_w + mu I) w = u^T u = 1.
    Matrix leading(d, static_cast<std::size_t>(code_bits));
    for (std::size_t j = 0; j < static_cast<std::size_t>(code_bits); ++j) {
        for (std::size_t i = 0; i < d; ++i) leading(i, j) = eig.eigenvectors(i, j);
    }
    LinearHashModel model;
    model.projection = solve_lower_transposed(chol_lower, leading);
    model.eigenvalues.assign(eig.eigenvalues.begin(), eig.eigenvalues.begin() + code_bits);
    model.mu = mu;
    model.code_bits = code_bits;

    const Matrix projected = matmul_at_b(model.projection, train.features);  // r x n
    model.thresholds.resize(static_cast<std::size_t>(code_bits));
    for (std::size_t j = 0; j < static_cast<std::size_t>(code_bits); ++j) {
        const double* row = projected.row_ptr(j);
        model.thresholds[j] =
            -median_threshold(std::vector<double>(row, row + train.item_count()));
    }
    return model;
}

BinaryCodes encode_linear(const LinearHashModel& model, const Matrix& x) {
    std::vector<std::int64_t> ids(x.cols());
    std::iota(ids.begin(), ids.end(), std::int64_t{0});
    return encode_linear(model, x, std::move(ids));
}

BinaryCodes encode_linear(const LinearHashModel& model, const Matrix& x,
                          std::vector<std::int64_t> item_ids) {
    if (x.rows() != model.projection.rows()) {
        throw DimensionError("encode_linear: expected feature dim " +
                             std::to_string(model.projection.rows()) + ", got " +
                             std::to_string(x.rows()));
    }
    Matrix projected = matmul_at_b(model.projection, x);
    for (std::size_t j = 0; j < projected.rows(); ++j) {
        double* row = projected.row_ptr(j);
        const double shift = model.thresholds[j];
        for (std::size_t i = 0; i < projected.cols(); ++i) row[i] += shift;
    }
    return sign_quantize(projected, std::move(item_ids));
}

}  // namespace ldahash
