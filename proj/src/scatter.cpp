#include "ldahash/scatter.hpp"

#include <cmath>
#include <string>

#include "ldahash/eigen.hpp"
#include "ldahash/errors.hpp"

namespace ldahash {

namespace {

// Column means per class plus the global mean, as d x (c+1): columns
// 0..c-1 are class means, column c is the global mean.
Matrix class_and_global_means(const Matrix& x, const std::vector<int>& labels,
                              const std::vector<std::size_t>& sizes) {
    const std::size_t d = x.rows();
    const std::size_t n = x.cols();
    const std::size_t c = sizes.size();
    Matrix means(d, c + 1);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t label = static_cast<std::size_t>(labels[i]);
        for (std::size_t j = 0; j < d; ++j) {
            means(j, label) += x(j, i);
            means(j, c) += x(j, i);
        }
    }
    for (std::size_t cls = 0; cls < c; ++cls) {
        for (std::size_t j = 0; j < d; ++j) {
            means(j, cls) /= static_cast<double>(sizes[cls]);
        }
    }
    for (std::size_t j = 0; j < d; ++j) means(j, c) /= static_cast<double>(n);
    return means;
}

// X with the global item mean subtracted from every column (= X H).
Matrix center_items(const Matrix& x) {
    Matrix centered = x;
    const std::vector<double> mean = row_means(x);
    for (std::size_t j = 0; j < x.rows(); ++j) {
        double* row = centered.row_ptr(j);
        for (std::size_t i = 0; i < x.cols(); ++i) row[i] -= mean[j];
    }
    return centered;
}

std::vector<std::size_t> validated_class_sizes(const std::vector<int>& labels,
                                               int class_count) {
    if (class_count < 1) throw ValidationError("scatter: class_count must be at least 1");
    std::vector<std::size_t> sizes(static_cast<std::size_t>(class_count), 0);
    for (int label : labels) {
        if (label < 0 || label >= class_count) {
            throw ValidationError("scatter: label " + std::to_string(label) + " out of range");
        }
        ++sizes[static_cast<std::size_t>(label)];
    }
    for (std::size_t cls = 0; cls < sizes.size(); ++cls) {
        if (sizes[cls] == 0) {
            throw ValidationError("scatter: class " + std::to_string(cls) + " has no items");
        }
    }
    return sizes;
}

}  // namespace

ScatterSet scatter_direct(const LabeledDataset& data, double mu) {
    data.validate();
    const Matrix& x = data.features;
    const std::size_t d = x.rows();
    const std::size_t n = x.cols();
    const std::size_t c = static_cast<std::size_t>(data.class_count);
    const std::vector<std::size_t> sizes = data.class_sizes();
    const Matrix means = class_and_global_means(x, data.labels, sizes);

    // Within: center every item at its class mean, then accumulate X_c X_c^T.
    Matrix class_centered(d, n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t label = static_cast<std::size_t>(data.labels[i]);
        for (std::size_t j = 0; j < d; ++j) {
            class_centered(j, i) = x(j, i) - means(j, label);
        }
    }
    ScatterSet scatters;
    scatters.mu = mu;
    scatters.within = matmul_a_bt(class_centered, class_centered);

    // Between: sqrt(n_i)-scaled class-mean offsets, M M^T.
    Matrix offsets(d, c);
    for (std::size_t cls = 0; cls < c; ++cls) {
        const double w = std::sqrt(static_cast<double>(sizes[cls]));
        for (std::size_t j = 0; j < d; ++j) {
            offsets(j, cls) = w * (means(j, cls) - means(j, c));
        }
    }
    scatters.between = matmul_a_bt(offsets, offsets);
    scatters.total = scatters.within + scatters.between;
    return scatters;
}

IndicatorMatrices indicator_matrices(const std::vector<int>& labels, int class_count) {
    const std::vector<std::size_t> sizes = validated_class_sizes(labels, class_count);
    const std::size_t n = labels.size();
    IndicatorMatrices ind;
    ind.uniform = Matrix(n, n);
    ind.class_block = Matrix(n, n);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int label_i = labels[i];
        const double inv_class = 1.0 / static_cast<double>(sizes[static_cast<std::size_t>(label_i)]);
        for (std::size_t j = 0; j < n; ++j) {
            ind.uniform(i, j) = inv_n;
            if (labels[j] == label_i) ind.class_block(i, j) = inv_class;
        }
    }
    ind.centering = Matrix::identity(n) - ind.uniform;
    return ind;
}

ScatterSet scatter_matrixform(const Matrix& x, const std::vector<int>& labels,
                              int class_count, double mu) {
    if (x.cols() != labels.size()) {
        throw DimensionError("scatter_matrixform: item count does not match label count");
    }
    const std::vector<std::size_t> sizes = validated_class_sizes(labels, class_count);
    const IndicatorMatrices ind = indicator_matrices(labels, class_count);
    const std::size_t n = x.cols();

    ScatterSet scatters;
    scatters.mu = mu;

    const Matrix within_weight = Matrix::identity(n) - ind.class_block;  // I - A^w
    const Matrix gw = matmul(x, within_weight);
    scatters.within = matmul_a_bt(gw, gw);

    const Matrix gt = matmul(x, ind.centering);
    scatters.total = matmul_a_bt(gt, gt);

    // Between through the label projection: X H Y (Y^T Y)^(-1) Y^T H X^T,
    // computed as K K^T with K = X H Y diag(1/sqrt(n_i)).
    const Matrix y = one_hot(labels, class_count);
    Matrix k = matmul(gt, y);  // X H Y, d x c
    for (std::size_t cls = 0; cls < sizes.size(); ++cls) {
        const double f = 1.0 / std::sqrt(static_cast<double>(sizes[cls]));
        for (std::size_t j = 0; j < k.rows(); ++j) k(j, cls) *= f;
    }
    scatters.between = matmul_a_bt(k, k);
    return scatters;
}

Matrix label_whiten(const Matrix& y) {
    const std::size_t n = y.rows();
    const std::size_t c = y.cols();
    std::vector<double> counts(c, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double row_sum = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            const double v = y(i, j);
            if (v != 0.0 && v != 1.0) {
                throw ValidationError("label_whiten: matrix is not one-hot");
            }
            row_sum += v;
            counts[j] += v;
        }
        if (row_sum != 1.0) {
            throw ValidationError("label_whiten: row " + std::to_string(i) +
                                  " does not sum to 1");
        }
    }
    Matrix whitened = y;
    for (std::size_t j = 0; j < c; ++j) {
        if (counts[j] == 0.0) {
            throw SingularityError("label_whiten: class " + std::to_string(j) +
                                   " is empty, Y^T Y singular");
        }
        const double f = 1.0 / std::sqrt(counts[j]);
        for (std::size_t i = 0; i < n; ++i) whitened(i, j) *= f;
    }
    return whitened;
}

double lda_trace(const ScatterSet& scatters) {
    Matrix regularized = scatters.total;
    for (std::size_t i = 0; i < regularized.rows(); ++i) {
        regularized(i, i) += scatters.mu;
    }
    try {
        return trace(solve_spd(regularized, scatters.between));
    } catch (const NotPositiveDefiniteError& err) {
        throw SingularityError(std::string("lda_trace: total scatter plus ridge is singular (") +
                               err.what() + ")");
    }
}

Matrix between_scatter_label_form(const Matrix& x, const std::vector<int>& labels,
                                  int class_count, bool whitened) {
    if (x.cols() != labels.size()) {
        throw DimensionError("between_scatter_label_form: item/label count mismatch");
    }
    validated_class_sizes(labels, class_count);
    Matrix g = one_hot(labels, class_count);
    if (whitened) g = label_whiten(g);
    const Matrix k = matmul(center_items(x), g);  // X H G
    return matmul_a_bt(k, k);
}

FrobeniusObjective frobenius_form(const Matrix& x, const std::vector<int>& labels,
                                  int class_count, double mu, bool use_whitened) {
    if (x.cols() != labels.size()) {
        throw DimensionError("frobenius_form: item/label count mismatch");
    }
    const std::vector<std::size_t> sizes = validated_class_sizes(labels, class_count);
    const std::size_t d = x.rows();
    const std::size_t c = sizes.size();

    const Matrix centered = center_items(x);
    Matrix regularized = matmul_a_bt(centered, centered);  // S_t
    for (std::size_t i = 0; i < d; ++i) regularized(i, i) += mu;
    Matrix root;
    try {
        root = spd_inverse_sqrt(regularized);
    } catch (const SingularityError&) {
        throw SingularityError("frobenius_form: total scatter plus ridge is singular");
    }

    Matrix g = one_hot(labels, class_count);
    if (use_whitened) g = label_whiten(g);

    FrobeniusObjective result;
    const Matrix projected = matmul(root, matmul(centered, g));  // (S_t+muI)^(-1/2) X H G
    const double norm = frobenius_norm(projected);
    result.total = norm * norm;

    const Matrix means = class_and_global_means(x, labels, sizes);
    result.per_class.resize(c, 0.0);
    Matrix offset(d, 1);
    for (std::size_t cls = 0; cls < c; ++cls) {
        for (std::size_t j = 0; j < d; ++j) {
            offset(j, 0) = means(j, cls) - means(j, c);
        }
        const Matrix normalized = matmul(root, offset);
        double sq = 0.0;
        for (double v : normalized.data()) sq += v * v;
        const double count = static_cast<double>(sizes[cls]);
        result.per_class[cls] = (use_whitened ? count : count * count) * sq;
    }
    return result;
}

}  // namespace ldahash
