#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ldahash/codes.hpp"
#include "ldahash/dataset.hpp"
#include "ldahash/matrix.hpp"

namespace ldahash {

enum class LabelMode { PlainLabels, WhitenedLabels };

struct NetworkConfig {
    std::size_t input_dim = 0;
    std::vector<std::size_t> hidden_dims{256};
    int code_bits = 16;
    double mu = 0.0005;  // regression ridge
    double nu = 0.001;   // activation-scale regularizer
    double learning_rate = 0.01;
    double momentum = 0.9;
    int batch_size = 64;
    int epochs = 100;
    std::uint64_t seed = 0;
    LabelMode label_mode = LabelMode::PlainLabels;
    bool track_train_map = false;

    void validate() const;
};

/// Feed-forward hash network: ReLU hidden layers, a linear map to r code
/// units passed through tanh with learnable per-bit scales (kept >= 0.1),
/// and a linear regression head from codes to class indicators.
struct DeepHashModel {
    struct Layer {
        Matrix weights;            // out x in
        std::vector<double> bias;  // out
    };
    std::vector<Layer> layers;  // hidden layers then the code layer
    std::vector<double> alpha;  // r, per-bit activation scale
    Matrix regression_weights;  // r x c
    std::vector<double> regression_bias;  // c
    NetworkConfig config;
    int class_count = 0;
};

constexpr double kAlphaMin = 0.1;

struct ForwardResult {
    std::vector<Matrix> hidden_pre;  // per hidden layer, before ReLU
    std::vector<Matrix> hidden_act;  // per hidden layer, after ReLU
    Matrix code_pre;                 // z, r x m
    Matrix code_act;                 // tanh(alpha ⊙ z), r x m, in (-1,1)
    Matrix regression;               // m x c
};

ForwardResult forward(const DeepHashModel& model, const Matrix& x_batch);

struct LossParts {
    double total = 0.0;
    double data = 0.0;
    double ridge = 0.0;
    double atanh = 0.0;
};

/// data = (1/m)||regression - Y||_F^2, ridge = mu ||W_reg||_F^2,
/// atanh = nu * sum_j alpha_j^-2.
LossParts loss(const DeepHashModel& model, const Matrix& x_batch, const Matrix& y_batch);

struct Gradients {
    std::vector<DeepHashModel::Layer> layers;
    std::vector<double> alpha;
    Matrix regression_weights;
    std::vector<double> regression_bias;
};

/// Exact reverse-mode gradients of the total loss for every parameter,
/// including the activation scales.
Gradients backward(const DeepHashModel& model, const Matrix& x_batch,
                   const Matrix& y_batch);

struct EpochRecord {
    int epoch = 0;
    double total = 0.0;
    double data = 0.0;
    double ridge = 0.0;
    double atanh = 0.0;
    double mean_abs_alpha = 0.0;
    double train_map = 0.0;
    bool has_train_map = false;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
};

/// SGD with momentum over seed-shuffled mini-batches. Identical
/// (data, config) pairs produce bit-identical models. A NaN loss aborts
/// with the last finite epoch in the message.
std::pair<DeepHashModel, TrainHistory> train(const LabeledDataset& data,
                                             const NetworkConfig& config);

/// Codes from the sign of the code-layer pre-activation (zero maps to +1);
/// equivalent to sign(tanh(alpha z)) for any positive alpha.
BinaryCodes encode_deep(const DeepHashModel& model, const Matrix& x);
BinaryCodes encode_deep(const DeepHashModel& model, const Matrix& x,
                        std::vector<std::int64_t> item_ids);

struct RegressionFit {
    Matrix weights;            // r x c
    std::vector<double> bias;  // c
    double objective = 0.0;    // ||F^T W + 1 b^T - Y||_F^2 + mu ||W||_F^2
};

/// Ridge regression from fixed features F (r x n) to indicator targets,
/// solved in closed form through the centered normal equations.
RegressionFit closed_form_regression(const Matrix& features, const Matrix& y_ind,
                                     double mu);

/// Residual of the identity linking the regression optimum on whitened
/// labels to the discriminant trace: |J* + Tr((S_t+muI)^(-1) S_b) -
/// Tr(Ytil^T H Ytil)|. Vanishes up to rounding for every input.
double regression_trace_identity_residual(const Matrix& features,
                                          const std::vector<int>& labels,
                                          int class_count, double mu);

}  // namespace ldahash
