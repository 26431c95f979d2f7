#include "ldahash/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ldahash/eigen.hpp"
#include "ldahash/errors.hpp"
#include "ldahash/eval.hpp"
#include "ldahash/rng.hpp"
#include "ldahash/scatter.hpp"

namespace ldahash {

void NetworkConfig::validate() const {
    if (input_dim < 1) throw ConfigError("network: input_dim must be >= 1");
    for (std::size_t h : hidden_dims) {
        if (h < 1) throw ConfigError("network: hidden layer width must be >= 1");
    }
    if (code_bits < 1) throw ConfigError("network: code_bits must be >= 1");
    if (mu < 0.0) throw ConfigError("network: mu must be >= 0");
    if (nu < 0.0) throw ConfigError("network: nu must be >= 0");
    if (learning_rate < 0.0) throw ConfigError("network: learning_rate must be >= 0");
    if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("network: momentum must be in [0,1)");
    if (batch_size < 2) throw ConfigError("network: batch_size must be >= 2");
    if (epochs < 0) throw ConfigError("network: epochs must be >= 0");
}

namespace {

// W * A + b broadcast over columns.
Matrix affine(const DeepHashModel::Layer& layer, const Matrix& a) {
    Matrix out = matmul(layer.weights, a);
    for (std::size_t i = 0; i < out.rows(); ++i) {
        double* row = out.row_ptr(i);
        const double b = layer.bias[i];
        for (std::size_t j = 0; j < out.cols(); ++j) row[j] += b;
    }
    return out;
}

void require_finite_layer(const Matrix& values, const std::string& layer_name) {
    for (double v : values.data()) {
        if (!std::isfinite(v)) {
            throw NumericError("network: non-finite activation in " + layer_name);
        }
    }
}

Matrix relu(const Matrix& pre) {
    Matrix act = pre;
    for (double& v : act.data()) v = v > 0.0 ? v : 0.0;
    return act;
}

std::vector<double> row_sums(const Matrix& a) {
    std::vector<double> sums(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* row = a.row_ptr(i);
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) s += row[j];
        sums[i] = s;
    }
    return sums;
}

void check_input_dim(const DeepHashModel& model, const Matrix& x) {
    if (x.rows() != model.config.input_dim) {
        throw DimensionError("network: expected feature dim " +
                             std::to_string(model.config.input_dim) + ", got " +
                             std::to_string(x.rows()));
    }
}

}  // namespace

ForwardResult forward(const DeepHashModel& model, const Matrix& x_batch) {
    check_input_dim(model, x_batch);
    ForwardResult result;
    const std::size_t hidden_count = model.layers.size() - 1;
    result.hidden_pre.reserve(hidden_count);
    result.hidden_act.reserve(hidden_count);
    const Matrix* current = &x_batch;
    for (std::size_t l = 0; l < hidden_count; ++l) {
        result.hidden_pre.push_back(affine(model.layers[l], *current));
        require_finite_layer(result.hidden_pre.back(), "hidden layer " + std::to_string(l));
        result.hidden_act.push_back(relu(result.hidden_pre.back()));
        current = &result.hidden_act.back();
    }
    result.code_pre = affine(model.layers.back(), *current);
    require_finite_layer(result.code_pre, "code layer");

    result.code_act = result.code_pre;
    for (std::size_t j = 0; j < result.code_act.rows(); ++j) {
        double* row = result.code_act.row_ptr(j);
        const double scale = model.alpha[j];
        for (std::size_t i = 0; i < result.code_act.cols(); ++i) {
            row[i] = std::tanh(scale * row[i]);
        }
    }

    // regression = B^T W_reg + 1 b^T, one row per item.
    result.regression = matmul_at_b(result.code_act, model.regression_weights);
    for (std::size_t i = 0; i < result.regression.rows(); ++i) {
        double* row = result.regression.row_ptr(i);
        for (std::size_t k = 0; k < result.regression.cols(); ++k) {
            row[k] += model.regression_bias[k];
        }
    }
    require_finite_layer(result.regression, "regression layer");
    return result;
}

namespace {

LossParts loss_from_forward(const DeepHashModel& model, const ForwardResult& fwd,
                            const Matrix& y_batch) {
    if (!fwd.regression.same_shape(y_batch)) {
        throw DimensionError("network loss: target shape does not match regression output");
    }
    LossParts parts;
    const double m = static_cast<double>(y_batch.rows());
    double residual_sq = 0.0;
    for (std::size_t i = 0; i < y_batch.rows(); ++i) {
        for (std::size_t k = 0; k < y_batch.cols(); ++k) {
            const double r = fwd.regression(i, k) - y_batch(i, k);
            residual_sq += r * r;
        }
    }
    parts.data = residual_sq / m;
    double w_sq = 0.0;
    for (double v : model.regression_weights.data()) w_sq += v * v;
    parts.ridge = model.config.mu * w_sq;
    double inv_alpha_sq = 0.0;
    for (double a : model.alpha) inv_alpha_sq += 1.0 / (a * a);
    parts.atanh = model.config.nu * inv_alpha_sq;
    parts.total = parts.data + parts.ridge + parts.atanh;
    return parts;
}

Gradients gradients_from_forward(const DeepHashModel& model, const ForwardResult& fwd,
                                 const Matrix& x_batch, const Matrix& y_batch) {
    const double m = static_cast<double>(y_batch.rows());
    const double scale = 2.0 / m;

    Matrix residual = fwd.regression - y_batch;  // m x c

    Gradients grads;
    // W_reg: (2/m) B P + 2 mu W_reg
    grads.regression_weights = scaled(matmul(fwd.code_act, residual), scale);
    add_scaled_in_place(grads.regression_weights, model.regression_weights,
                        2.0 * model.config.mu);
    // b_reg: (2/m) column sums of P
    grads.regression_bias.assign(y_batch.cols(), 0.0);
    for (std::size_t i = 0; i < residual.rows(); ++i) {
        for (std::size_t k = 0; k < residual.cols(); ++k) {
            grads.regression_bias[k] += scale * residual(i, k);
        }
    }

    // Through the hash activation: dL/dB = (2/m) W_reg P^T, then
    // dB/dz = alpha (1 - B^2) and dB/dalpha = z (1 - B^2).
    Matrix grad_code_act = scaled(matmul_a_bt(model.regression_weights, residual), scale);
    Matrix grad_code_pre(grad_code_act.rows(), grad_code_act.cols());
    grads.alpha.assign(model.alpha.size(), 0.0);
    for (std::size_t j = 0; j < grad_code_act.rows(); ++j) {
        const double a = model.alpha[j];
        double alpha_accum = 0.0;
        for (std::size_t i = 0; i < grad_code_act.cols(); ++i) {
            const double b = fwd.code_act(j, i);
            const double slope = 1.0 - b * b;
            const double g = grad_code_act(j, i);
            grad_code_pre(j, i) = g * a * slope;
            alpha_accum += g * fwd.code_pre(j, i) * slope;
        }
        grads.alpha[j] = alpha_accum - 2.0 * model.config.nu / (a * a * a);
    }

    // Backprop through affine layers.
    grads.layers.resize(model.layers.size());
    const std::size_t hidden_count = model.layers.size() - 1;
    const Matrix* upstream = &grad_code_pre;
    Matrix upstream_storage;
    for (std::size_t l = model.layers.size(); l-- > 0;) {
        const Matrix& input_act =
            l == 0 ? x_batch : fwd.hidden_act[l - 1];
        grads.layers[l].weights = matmul_a_bt(*upstream, input_act);
        grads.layers[l].bias = row_sums(*upstream);
        if (l == 0) break;
        Matrix grad_act = matmul_at_b(model.layers[l].weights, *upstream);
        // ReLU gate of hidden layer l-1
        const Matrix& pre = fwd.hidden_pre[l - 1];
        for (std::size_t i = 0; i < grad_act.rows(); ++i) {
            for (std::size_t j = 0; j < grad_act.cols(); ++j) {
                if (pre(i, j) <= 0.0) grad_act(i, j) = 0.0;
            }
        }
        upstream_storage = std::move(grad_act);
        upstream = &upstream_storage;
    }
    (void)hidden_count;
    return grads;
}

}  // namespace

LossParts loss(const DeepHashModel& model, const Matrix& x_batch, const Matrix& y_batch) {
    return loss_from_forward(model, forward(model, x_batch), y_batch);
}

Gradients backward(const DeepHashModel& model, const Matrix& x_batch,
                   const Matrix& y_batch) {
    return gradients_from_forward(model, forward(model, x_batch), x_batch, y_batch);
}

namespace {

DeepHashModel initialize_model(const NetworkConfig& config, int class_count, Rng& rng) {
    DeepHashModel model;
    model.config = config;
    model.class_count = class_count;
    std::vector<std::size_t> widths;
    widths.push_back(config.input_dim);
    widths.insert(widths.end(), config.hidden_dims.begin(), config.hidden_dims.end());
    widths.push_back(static_cast<std::size_t>(config.code_bits));

    auto uniform_init = [&rng](Matrix& weights) {
        const double bound =
            std::sqrt(6.0 / static_cast<double>(weights.rows() + weights.cols()));
        for (double& v : weights.data()) v = rng.uniform(-bound, bound);
    };

    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        DeepHashModel::Layer layer;
        layer.weights = Matrix(widths[l + 1], widths[l]);
        uniform_init(layer.weights);
        layer.bias.assign(widths[l + 1], 0.0);
        model.layers.push_back(std::move(layer));
    }
    model.alpha.assign(static_cast<std::size_t>(config.code_bits), 1.0);
    model.regression_weights = Matrix(static_cast<std::size_t>(config.code_bits),
                                      static_cast<std::size_t>(class_count));
    uniform_init(model.regression_weights);
    model.regression_bias.assign(static_cast<std::size_t>(class_count), 0.0);
    return model;
}

struct Velocity {
    std::vector<DeepHashModel::Layer> layers;
    std::vector<double> alpha;
    Matrix regression_weights;
    std::vector<double> regression_bias;

    explicit Velocity(const DeepHashModel& model) {
        layers.resize(model.layers.size());
        for (std::size_t l = 0; l < model.layers.size(); ++l) {
            layers[l].weights =
                Matrix(model.layers[l].weights.rows(), model.layers[l].weights.cols());
            layers[l].bias.assign(model.layers[l].bias.size(), 0.0);
        }
        alpha.assign(model.alpha.size(), 0.0);
        regression_weights =
            Matrix(model.regression_weights.rows(), model.regression_weights.cols());
        regression_bias.assign(model.regression_bias.size(), 0.0);
    }
};

void momentum_step(Matrix& param, Matrix& velocity, const Matrix& grad, double lr,
                   double momentum) {
    auto p = param.data();
    auto v = velocity.data();
    auto g = grad.data();
    for (std::size_t i = 0; i < p.size(); ++i) {
        v[i] = momentum * v[i] - lr * g[i];
        p[i] += v[i];
    }
}

void momentum_step(std::vector<double>& param, std::vector<double>& velocity,
                   const std::vector<double>& grad, double lr, double momentum) {
    for (std::size_t i = 0; i < param.size(); ++i) {
        velocity[i] = momentum * velocity[i] - lr * grad[i];
        param[i] += velocity[i];
    }
}

double self_retrieval_map(const DeepHashModel& model, const LabeledDataset& data) {
    const BinaryCodes codes = encode_deep(model, data.features);
    const HammingIndex index(codes);
    return evaluate(index, codes, data.labels, data.labels, 2).map;
}

}  // namespace

std::pair<DeepHashModel, TrainHistory> train(const LabeledDataset& data,
                                             const NetworkConfig& config) {
    data.validate();
    config.validate();
    if (data.dim() != config.input_dim) {
        throw ConfigError("train: config input_dim " + std::to_string(config.input_dim) +
                          " does not match data dim " + std::to_string(data.dim()));
    }

    Matrix targets = one_hot(data.labels, data.class_count);
    if (config.label_mode == LabelMode::WhitenedLabels) {
        targets = label_whiten(targets);
    }

    Rng rng(config.seed);
    DeepHashModel model = initialize_model(config, data.class_count, rng);
    Velocity velocity(model);
    TrainHistory history;

    const std::size_t n = data.item_count();
    const std::size_t m = static_cast<std::size_t>(config.batch_size);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        LossParts epoch_sum;
        int batch_count = 0;
        for (std::size_t start = 0; start < n; start += m) {
            const std::size_t count = std::min(m, n - start);
            Matrix x_batch(data.dim(), count);
            Matrix y_batch(count, targets.cols());
            for (std::size_t k = 0; k < count; ++k) {
                const std::size_t src = order[start + k];
                for (std::size_t j = 0; j < data.dim(); ++j) {
                    x_batch(j, k) = data.features(j, src);
                }
                for (std::size_t cidx = 0; cidx < targets.cols(); ++cidx) {
                    y_batch(k, cidx) = targets(src, cidx);
                }
            }

            const ForwardResult fwd = forward(model, x_batch);
            const LossParts parts = loss_from_forward(model, fwd, y_batch);
            if (!std::isfinite(parts.total)) {
                throw DivergenceError(
                    "train: loss diverged in epoch " + std::to_string(epoch) +
                    "; last finite epoch " + std::to_string(epoch - 1));
            }
            const Gradients grads = gradients_from_forward(model, fwd, x_batch, y_batch);

            for (std::size_t l = 0; l < model.layers.size(); ++l) {
                momentum_step(model.layers[l].weights, velocity.layers[l].weights,
                              grads.layers[l].weights, config.learning_rate, config.momentum);
                momentum_step(model.layers[l].bias, velocity.layers[l].bias,
                              grads.layers[l].bias, config.learning_rate, config.momentum);
            }
            momentum_step(model.regression_weights, velocity.regression_weights,
                          grads.regression_weights, config.learning_rate, config.momentum);
            momentum_step(model.regression_bias, velocity.regression_bias,
                          grads.regression_bias, config.learning_rate, config.momentum);
            momentum_step(model.alpha, velocity.alpha, grads.alpha, config.learning_rate,
                          config.momentum);
            for (double& a : model.alpha) a = std::max(a, kAlphaMin);

            epoch_sum.total += parts.total;
            epoch_sum.data += parts.data;
            epoch_sum.ridge += parts.ridge;
            epoch_sum.atanh += parts.atanh;
            ++batch_count;
        }

        EpochRecord record;
        record.epoch = epoch;
        const double inv = 1.0 / static_cast<double>(batch_count);
        record.total = epoch_sum.total * inv;
        record.data = epoch_sum.data * inv;
        record.ridge = epoch_sum.ridge * inv;
        record.atanh = epoch_sum.atanh * inv;
        double alpha_sum = 0.0;
        for (double a : model.alpha) alpha_sum += std::abs(a);
        record.mean_abs_alpha = alpha_sum / static_cast<double>(model.alpha.size());
        if (config.track_train_map) {
            record.train_map = self_retrieval_map(model, data);
            record.has_train_map = true;
        }
        history.epochs.push_back(record);
    }
    return {std::move(model), std::move(history)};
}

BinaryCodes encode_deep(const DeepHashModel& model, const Matrix& x) {
    std::vector<std::int64_t> ids(x.cols());
    std::iota(ids.begin(), ids.end(), std::int64_t{0});
    return encode_deep(model, x, std::move(ids));
}

BinaryCodes encode_deep(const DeepHashModel& model, const Matrix& x,
                        std::vector<std::int64_t> item_ids) {
    check_input_dim(model, x);
    Matrix current = x;
    for (std::size_t l = 0; l + 1 < model.layers.size(); ++l) {
        current = relu(affine(model.layers[l], current));
    }
    const Matrix code_pre = affine(model.layers.back(), current);
    return sign_quantize(code_pre, std::move(item_ids));
}

RegressionFit closed_form_regression(const Matrix& features, const Matrix& y_ind,
                                     double mu) {
    if (features.cols() != y_ind.rows()) {
        throw DimensionError("closed_form_regression: item counts disagree");
    }
    if (mu < 0.0) throw ValidationError("closed_form_regression: mu must be >= 0");
    const std::size_t r = features.rows();
    const std::size_t n = features.cols();
    const std::size_t c = y_ind.cols();

    // Centered normal equations: (F H F^T + mu I) W = F H Y.
    const std::vector<double> feature_means = row_means(features);
    Matrix centered = features;
    for (std::size_t j = 0; j < r; ++j) {
        double* row = centered.row_ptr(j);
        for (std::size_t i = 0; i < n; ++i) row[i] -= feature_means[j];
    }
    Matrix gram = matmul_a_bt(centered, centered);
    for (std::size_t j = 0; j < r; ++j) gram(j, j) += mu;
    const Matrix rhs = matmul(centered, y_ind);

    RegressionFit fit;
    try {
        fit.weights = solve_spd(gram, rhs);
    } catch (const NotPositiveDefiniteError& err) {
        throw SingularityError(
            std::string("closed_form_regression: singular system with mu = 0 (") +
            err.what() + ")");
    }

    const std::vector<double> target_means = col_means(y_ind);
    fit.bias.assign(c, 0.0);
    for (std::size_t k = 0; k < c; ++k) {
        double shift = target_means[k];
        for (std::size_t j = 0; j < r; ++j) shift -= fit.weights(j, k) * feature_means[j];
        fit.bias[k] = shift;
    }

    // Objective evaluated literally.
    const Matrix predicted = matmul_at_b(features, fit.weights);  // n x c
    double residual_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < c; ++k) {
            const double rres = predicted(i, k) + fit.bias[k] - y_ind(i, k);
            residual_sq += rres * rres;
        }
    }
    double w_sq = 0.0;
    for (double v : fit.weights.data()) w_sq += v * v;
    fit.objective = residual_sq + mu * w_sq;
    return fit;
}

double regression_trace_identity_residual(const Matrix& features,
                                          const std::vector<int>& labels,
                                          int class_count, double mu) {
    if (!(mu > 0.0)) {
        throw ValidationError("regression_trace_identity_residual: mu must be positive");
    }
    const Matrix whitened = label_whiten(one_hot(labels, class_count));
    const RegressionFit fit = closed_form_regression(features, whitened, mu);
    const ScatterSet scatters = scatter_matrixform(features, labels, class_count, mu);
    const double trace_value = lda_trace(scatters);

    // Tr(Ytil^T H Ytil) = squared Frobenius norm of the column-centered Ytil.
    const std::vector<double> means = col_means(whitened);
    double constant = 0.0;
    for (std::size_t i = 0; i < whitened.rows(); ++i) {
        for (std::size_t j = 0; j < whitened.cols(); ++j) {
            const double v = whitened(i, j) - means[j];
            constant += v * v;
        }
    }
    return std::abs(fit.objective + trace_value - constant);
}

}  // namespace ldahash
