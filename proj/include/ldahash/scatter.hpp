#pragma once

#include <vector>

#include "ldahash/dataset.hpp"
#include "ldahash/matrix.hpp"

namespace ldahash {

/// Within/between/total scatter matrices plus the ridge constant used when
/// inverting the total scatter. total = within + between holds by
/// construction (to rounding).
struct ScatterSet {
    Matrix within;   // d x d
    Matrix between;  // d x d
    Matrix total;    // d x d
    double mu = 0.0;
};

constexpr double kDefaultMu = 0.0005;

/// Per-class sums of outer products: within = sum over classes of centered
/// outer products, between = sum of n_i * (mean_i - mean)(mean_i - mean)^T,
/// total = within + between.
ScatterSet scatter_direct(const LabeledDataset& data, double mu = kDefaultMu);

/// The n x n weighting matrices behind the matrix-form scatters: `uniform`
/// has every entry 1/n, `class_block`(i,j) = 1/n_class when labels match
/// (else 0), and `centering` = I - uniform. All symmetric and idempotent.
struct IndicatorMatrices {
    Matrix uniform;      // A^t
    Matrix class_block;  // A^w
    Matrix centering;    // H
};
IndicatorMatrices indicator_matrices(const std::vector<int>& labels, int class_count);

/// Same ScatterSet computed through the indicator-matrix identities:
/// within = X(I-A^w)(I-A^w)^T X^T, total = XH H^T X^T, between through the
/// label-projection form X H Y (Y^T Y)^(-1) Y^T H X^T.
ScatterSet scatter_matrixform(const Matrix& x, const std::vector<int>& labels,
                              int class_count, double mu = kDefaultMu);

/// Y scaled column-wise by 1/sqrt(class size); the result has orthonormal
/// columns. Input must be one-hot with every class occupied.
Matrix label_whiten(const Matrix& y);

/// Tr((total + mu I)^(-1) between).
double lda_trace(const ScatterSet& scatters);

/// Between-class scatter built from the raw label matrix instead of the
/// class-size-normalized one: X H G G^T H X^T with G = Y (plain) or the
/// whitened labels. The plain form weights class offsets by n_i^2.
Matrix between_scatter_label_form(const Matrix& x, const std::vector<int>& labels,
                                  int class_count, bool whitened);

struct FrobeniusObjective {
    double total = 0.0;
    std::vector<double> per_class;
};

/// ||(S_t + mu I)^(-1/2) X H G||_F^2 with G the plain (use_whitened=false)
/// or whitened (true) label matrix, decomposed per class: entry i is
/// n_i^2 (plain) or n_i (whitened) times the squared normalized distance of
/// class mean i from the global mean.
FrobeniusObjective frobenius_form(const Matrix& x, const std::vector<int>& labels,
                                  int class_count, double mu, bool use_whitened);

}  // namespace ldahash
