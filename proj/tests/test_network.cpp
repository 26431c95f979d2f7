#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "ldahash/data.hpp"
#include "ldahash/errors.hpp"
#include "ldahash/network.hpp"
#include "ldahash/scatter.hpp"

using namespace ldahash;
using test_support::random_dataset;
using test_support::rel_scalar_diff;

namespace {

// Identity-ish model with no hidden layers: z = W x + b.
DeepHashModel linear_model(std::size_t dim, int bits, int classes) {
    DeepHashModel model;
    model.config.input_dim = dim;
    model.config.hidden_dims = {};
    model.config.code_bits = bits;
    model.config.batch_size = 2;
    model.class_count = classes;
    DeepHashModel::Layer layer;
    layer.weights = Matrix(static_cast<std::size_t>(bits), dim);
    for (std::size_t j = 0; j < std::min<std::size_t>(bits, dim); ++j) {
        layer.weights(j, j) = 1.0;
    }
    layer.bias.assign(static_cast<std::size_t>(bits), 0.0);
    model.layers.push_back(std::move(layer));
    model.alpha.assign(static_cast<std::size_t>(bits), 1.0);
    model.regression_weights =
        Matrix(static_cast<std::size_t>(bits), static_cast<std::size_t>(classes));
    model.regression_bias.assign(static_cast<std::size_t>(classes), 0.0);
    return model;
}

DeepHashModel seeded_tiny_model(Rng& rng) {
    LabeledDataset data;
    data.class_count = 2;
    data.features = test_support::random_matrix(rng, 3, 5);
    data.labels = {0, 1, 0, 1, 1};
    NetworkConfig config;
    config.input_dim = 3;
    config.hidden_dims = {4};
    config.code_bits = 2;
    config.batch_size = 5;
    config.epochs = 0;
    config.seed = rng.next_u64();
    return train(data, config).first;
}

}  // namespace

TEST_CASE("forward zero pre-activation gives zero codes") {
    DeepHashModel model = linear_model(2, 2, 2);
    model.alpha = {3.0, 17.0};
    const ForwardResult fwd = forward(model, Matrix(2, 4));
    CHECK(max_abs(fwd.code_act) == 0.0);  // tanh(alpha * 0) = 0 for any alpha
}

TEST_CASE("forward saturates for large alpha") {
    DeepHashModel model = linear_model(1, 1, 2);
    model.alpha = {50.0};
    Matrix x(1, 1);
    x(0, 0) = 0.5;
    const ForwardResult fwd = forward(model, x);
    CHECK(std::abs(fwd.code_act(0, 0) - 1.0) <= 1e-8);
}

TEST_CASE("forward single linear layer is elementwise tanh") {
    DeepHashModel model = linear_model(3, 3, 2);
    Rng rng(91);
    const Matrix x = test_support::random_matrix(rng, 3, 6);
    const ForwardResult fwd = forward(model, x);
    for (std::size_t j = 0; j < 3; ++j) {
        for (std::size_t i = 0; i < 6; ++i) {
            CHECK(fwd.code_act(j, i) == doctest::Approx(std::tanh(x(j, i))).epsilon(1e-15));
        }
    }
    // Outputs live strictly inside (-1, 1).
    for (double v : fwd.code_act.data()) {
        CHECK(v > -1.0);
        CHECK(v < 1.0);
    }
    CHECK_THROWS_AS(forward(model, Matrix(4, 1)), DimensionError);
}

TEST_CASE("loss decomposition") {
    Rng rng(92);
    DeepHashModel model = seeded_tiny_model(rng);
    const Matrix x = test_support::random_matrix(rng, 3, 5);
    const Matrix y = one_hot({0, 1, 0, 1, 0}, 2);

    // Mean predictor: W_reg = 0, b_reg = column means -> data term is the
    // summed per-column variance.
    model.regression_weights = Matrix(2, 2);
    const ForwardResult fwd = forward(model, x);
    (void)fwd;
    std::vector<double> means = {3.0 / 5.0, 2.0 / 5.0};
    model.regression_bias = means;
    model.config.mu = 0.0;
    model.config.nu = 0.0;
    const LossParts parts = loss(model, x, y);
    double expected = 0.0;
    for (std::size_t k = 0; k < 2; ++k) {
        for (std::size_t i = 0; i < 5; ++i) {
            const double r = means[k] - y(i, k);
            expected += r * r;
        }
    }
    expected /= 5.0;
    CHECK(parts.data == doctest::Approx(expected));
    CHECK(parts.ridge == 0.0);
    CHECK(parts.atanh == 0.0);

    // Regularizer values follow the config constants directly.
    model.config.nu = 0.001;
    model.alpha = {1.0, 1.0};
    const LossParts with_reg = loss(model, x, y);
    CHECK(with_reg.atanh == doctest::Approx(0.001 * 2));

    // A perfect predictor with zero regularizers has zero loss.
    DeepHashModel perfect = linear_model(2, 2, 2);
    perfect.config.mu = 0.0;
    perfect.config.nu = 0.0;
    Matrix x0(2, 2);  // z = 0 -> B = 0 -> regression = b_reg
    perfect.regression_bias = {0.25, 0.75};
    Matrix y0(2, 2);
    y0(0, 0) = 0.25;
    y0(0, 1) = 0.75;
    y0(1, 0) = 0.25;
    y0(1, 1) = 0.75;
    CHECK(loss(perfect, x0, y0).total == doctest::Approx(0.0));
}

TEST_CASE("backward matches central finite differences") {
    Rng rng(93);
    for (int round = 0; round < 4; ++round) {
        DeepHashModel model = seeded_tiny_model(rng);
        for (std::size_t j = 0; j < model.alpha.size(); ++j) {
            model.alpha[j] = 0.6 + 0.4 * static_cast<double>(j);
        }
        for (auto& layer : model.layers) {
            for (double& b : layer.bias) b = rng.uniform(-0.2, 0.2);
        }
        const Matrix x = test_support::random_matrix(rng, 3, 5);
        const Matrix y = one_hot({0, 1, 1, 0, 1}, 2);
        const Gradients grads = backward(model, x, y);

        // Finite-difference oracle over every parameter.
        const double step = 1e-5;
        auto check_param = [&](double* param, double analytic) {
            const double saved = *param;
            *param = saved + step;
            const double up = loss(model, x, y).total;
            *param = saved - step;
            const double down = loss(model, x, y).total;
            *param = saved;
            const double fd = (up - down) / (2.0 * step);
            CHECK(std::abs(fd - analytic) / std::max(1.0, std::abs(analytic)) <= 1e-4);
        };
        for (std::size_t l = 0; l < model.layers.size(); ++l) {
            auto weights = model.layers[l].weights.data();
            auto grad_weights = grads.layers[l].weights.data();
            for (std::size_t i = 0; i < weights.size(); ++i) {
                check_param(&weights[i], grad_weights[i]);
            }
            for (std::size_t i = 0; i < model.layers[l].bias.size(); ++i) {
                check_param(&model.layers[l].bias[i], grads.layers[l].bias[i]);
            }
        }
        for (std::size_t i = 0; i < model.alpha.size(); ++i) {
            check_param(&model.alpha[i], grads.alpha[i]);
        }
        auto reg_weights = model.regression_weights.data();
        auto reg_grads = grads.regression_weights.data();
        for (std::size_t i = 0; i < reg_weights.size(); ++i) {
            check_param(&reg_weights[i], reg_grads[i]);
        }
        for (std::size_t i = 0; i < model.regression_bias.size(); ++i) {
            check_param(&model.regression_bias[i], grads.regression_bias[i]);
        }
    }
}

TEST_CASE("backward closed-form spot checks") {
    Rng rng(94);
    DeepHashModel model = seeded_tiny_model(rng);
    const Matrix x = test_support::random_matrix(rng, 3, 5);
    const Matrix y = one_hot({0, 1, 0, 1, 1}, 2);

    // At W_reg = 0 the ridge gradient vanishes and the data gradient is
    // (2/m) B (1 b^T - Y).
    model.regression_weights = Matrix(2, 2);
    model.regression_bias = {0.3, -0.2};
    const ForwardResult fwd = forward(model, x);
    const Gradients grads = backward(model, x, y);
    Matrix residual(5, 2);
    for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t k = 0; k < 2; ++k) {
            residual(i, k) = model.regression_bias[k] - y(i, k);
        }
    }
    const Matrix expected = scaled(matmul(fwd.code_act, residual), 2.0 / 5.0);
    CHECK(max_abs_diff(grads.regression_weights, expected) <= 1e-12);

    // Dead data path: zero input and zero biases leave only the alpha
    // regularizer.
    DeepHashModel dead = seeded_tiny_model(rng);
    for (auto& layer : dead.layers) {
        for (double& v : layer.weights.data()) v = 0.0;
        for (double& b : layer.bias) b = 0.0;
    }
    dead.regression_weights = Matrix(2, 2);
    dead.config.nu = 0.01;
    const Gradients dead_grads = backward(dead, Matrix(3, 4), one_hot({0, 1, 0, 1}, 2));
    for (std::size_t l = 0; l < dead_grads.layers.size(); ++l) {
        CHECK(max_abs(dead_grads.layers[l].weights) == 0.0);
    }
    for (std::size_t j = 0; j < dead.alpha.size(); ++j) {
        const double a = dead.alpha[j];
        CHECK(dead_grads.alpha[j] == doctest::Approx(-2.0 * 0.01 / (a * a * a)));
    }
}

TEST_CASE("train determinism and trivial schedules") {
    const LabeledDataset data = gen_gaussian_clusters(3, 3, 12, 5, 6.0);
    NetworkConfig config;
    config.input_dim = 5;
    config.hidden_dims = {8};
    config.code_bits = 4;
    config.batch_size = 8;
    config.epochs = 3;
    config.seed = 17;

    auto [model_a, history_a] = train(data, config);
    auto [model_b, history_b] = train(data, config);
    CHECK(test_support::bitwise_equal(model_a.regression_weights, model_b.regression_weights));
    for (std::size_t l = 0; l < model_a.layers.size(); ++l) {
        CHECK(test_support::bitwise_equal(model_a.layers[l].weights, model_b.layers[l].weights));
        CHECK(model_a.layers[l].bias == model_b.layers[l].bias);
    }
    CHECK(model_a.alpha == model_b.alpha);
    REQUIRE(history_a.epochs.size() == history_b.epochs.size());
    for (std::size_t e = 0; e < history_a.epochs.size(); ++e) {
        CHECK(history_a.epochs[e].total == history_b.epochs[e].total);
        CHECK(history_a.epochs[e].mean_abs_alpha == history_b.epochs[e].mean_abs_alpha);
    }

    // epochs = 0 returns the seeded initialization.
    config.epochs = 0;
    auto [init_model, init_history] = train(data, config);
    CHECK(init_history.epochs.empty());
    for (double b : init_model.layers[0].bias) CHECK(b == 0.0);
    for (double a : init_model.alpha) CHECK(a == 1.0);

    // learning_rate = 0 leaves the initialization untouched.
    config.epochs = 4;
    config.learning_rate = 0.0;
    auto [frozen_model, frozen_history] = train(data, config);
    CHECK(test_support::bitwise_equal(frozen_model.layers[0].weights,
                                      init_model.layers[0].weights));
    CHECK(frozen_model.regression_bias == init_model.regression_bias);
    CHECK(frozen_history.epochs.size() == 4);
}

TEST_CASE("training reduces the data term on separable clusters") {
    const LabeledDataset data = gen_gaussian_clusters(11, 10, 100, 16, 20.0);
    NetworkConfig config;
    config.input_dim = 16;
    config.code_bits = 16;
    config.epochs = 12;
    config.seed = 4;
    auto [model, history] = train(data, config);
    (void)model;
    REQUIRE(history.epochs.size() == 12);
    CHECK(history.epochs.back().data < history.epochs.front().data);
}

TEST_CASE("alpha grows once the data term plateaus on frozen features") {
    // Frozen-feature variant: the layer below the hash activation stays
    // fixed and only (alpha, W_reg, b_reg) take full-batch steps. After the
    // head converges, the inverse-square regularizer drives the scales up.
    Rng rng(98);
    DeepHashModel model = linear_model(4, 4, 2);
    for (double& v : model.layers[0].weights.data()) v = rng.normal();
    for (double& v : model.regression_weights.data()) v = 0.1 * rng.normal();
    model.config.mu = 0.0005;
    model.config.nu = 0.001;

    const Matrix x = test_support::random_matrix(rng, 4, 24);
    std::vector<int> labels(24);
    for (std::size_t i = 0; i < 24; ++i) labels[i] = static_cast<int>(i % 2);
    const Matrix y = one_hot(labels, 2);

    const double lr = 0.05;
    std::vector<double> mean_alpha_track;
    std::vector<double> data_track;
    for (int step = 0; step < 400; ++step) {
        const Gradients grads = backward(model, x, y);
        for (std::size_t j = 0; j < model.alpha.size(); ++j) {
            model.alpha[j] = std::max(kAlphaMin, model.alpha[j] - lr * grads.alpha[j]);
        }
        add_scaled_in_place(model.regression_weights, grads.regression_weights, -lr);
        for (std::size_t k = 0; k < model.regression_bias.size(); ++k) {
            model.regression_bias[k] -= lr * grads.regression_bias[k];
        }
        const LossParts parts = loss(model, x, y);
        data_track.push_back(parts.data);
        double mean_alpha = 0.0;
        for (double a : model.alpha) mean_alpha += std::abs(a);
        mean_alpha_track.push_back(mean_alpha / static_cast<double>(model.alpha.size()));
    }
    // The data term has plateaued over the second half of the run...
    CHECK(std::abs(data_track[399] - data_track[200]) <= 0.05 * (1.0 + data_track[200]));
    // ...and from there the mean scale never decreases and strictly grows.
    for (std::size_t step = 201; step < 400; ++step) {
        CHECK(mean_alpha_track[step] >= mean_alpha_track[step - 1] - 1e-12);
    }
    CHECK(mean_alpha_track[399] > mean_alpha_track[200]);
}

TEST_CASE("training aborts when the loss leaves the finite range") {
    const LabeledDataset data = gen_gaussian_clusters(13, 2, 10, 4, 5.0);
    NetworkConfig config;
    config.input_dim = 4;
    config.code_bits = 4;
    config.epochs = 50;
    config.learning_rate = 1e30;
    config.seed = 2;
    CHECK_THROWS_AS(train(data, config), NumericError);
}

TEST_CASE("encode_deep uses the pre-activation sign with +1 ties") {
    DeepHashModel model = linear_model(2, 2, 2);
    Matrix x(2, 2);
    x(0, 0) = 0.3;
    x(1, 0) = -0.7;
    x(0, 1) = 0.0;
    x(1, 1) = 0.0;
    const BinaryCodes codes = encode_deep(model, x);
    CHECK(codes.bit(0, 0));
    CHECK_FALSE(codes.bit(0, 1));
    CHECK(codes.bit(1, 0));  // zero pre-activation maps to +1
    CHECK(codes.bit(1, 1));

    // Codes ignore any positive alpha rescaling.
    DeepHashModel rescaled = model;
    rescaled.alpha = {0.2, 31.0};
    CHECK(encode_deep(rescaled, x).words == codes.words);
}

TEST_CASE("closed-form regression") {
    Rng rng(95);
    {
        // Uninformative features: bias carries the column means.
        const Matrix f(3, 6);
        const Matrix y = one_hot({0, 1, 2, 0, 1, 0}, 3);
        const RegressionFit fit = closed_form_regression(f, y, 0.5);
        CHECK(max_abs(fit.weights) == 0.0);
        const auto means = col_means(y);
        for (std::size_t k = 0; k < 3; ++k) {
            CHECK(fit.bias[k] == doctest::Approx(means[k]));
        }
        double expected = 0.0;
        for (std::size_t i = 0; i < y.rows(); ++i) {
            for (std::size_t k = 0; k < y.cols(); ++k) {
                const double r = means[k] - y(i, k);
                expected += r * r;
            }
        }
        CHECK(fit.objective == doctest::Approx(expected));
    }
    {
        // Interpolation: targets generated by a linear map are recovered.
        const Matrix f = test_support::random_matrix(rng, 4, 20);
        const Matrix w0 = test_support::random_matrix(rng, 4, 3);
        Matrix y = matmul_at_b(f, w0);
        for (std::size_t i = 0; i < y.rows(); ++i) {
            for (std::size_t k = 0; k < y.cols(); ++k) y(i, k) += 0.3 * (k + 1.0);
        }
        const RegressionFit fit = closed_form_regression(f, y, 0.0);
        CHECK(fit.objective <= 1e-16 * frobenius_norm(y) * frobenius_norm(y) + 1e-18);
    }
    {
        // The closed form beats random probe points.
        const Matrix f = test_support::random_matrix(rng, 3, 15);
        const Matrix y = one_hot({0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1, 2}, 3);
        const double mu = 0.01;
        const RegressionFit fit = closed_form_regression(f, y, mu);
        for (int probe = 0; probe < 100; ++probe) {
            const Matrix w = test_support::random_matrix(rng, 3, 3);
            std::vector<double> b(3);
            for (double& v : b) v = rng.normal();
            const Matrix predicted = matmul_at_b(f, w);
            double objective = 0.0;
            for (std::size_t i = 0; i < y.rows(); ++i) {
                for (std::size_t k = 0; k < y.cols(); ++k) {
                    const double r = predicted(i, k) + b[k] - y(i, k);
                    objective += r * r;
                }
            }
            for (double v : w.data()) objective += mu * v * v;
            CHECK(fit.objective <= objective + 1e-12);
        }
    }
    {
        // Singular system without a ridge.
        const Matrix f(2, 4);  // zero features, zero Gram matrix
        const Matrix y = one_hot({0, 1, 0, 1}, 2);
        CHECK_THROWS_AS(closed_form_regression(f, y, 0.0), SingularityError);
    }
}

TEST_CASE("regression/trace identity residual") {
    Rng rng(96);
    {
        // Zero features: both the trace and the objective-constant gap vanish.
        const Matrix f(4, 6);
        CHECK(regression_trace_identity_residual(f, {0, 1, 0, 1, 0, 1}, 2, kDefaultMu) <=
              1e-12);
    }
    {
        // Single class: between-class scatter is zero.
        const Matrix f = test_support::random_matrix(rng, 4, 6);
        CHECK(regression_trace_identity_residual(f, {0, 0, 0, 0, 0, 0}, 1, kDefaultMu) <=
              1e-10);
    }
    for (int round = 0; round < 10; ++round) {
        const LabeledDataset data = random_dataset(rng, 8, 5, 10);
        CHECK(regression_trace_identity_residual(data.features, data.labels,
                                                 data.class_count, kDefaultMu) <= 1e-8);
    }
}

TEST_CASE("objective decrease equals trace increase under feature changes") {
    // For fixed labels the regression optimum and the regularized trace sum
    // to a label-only constant, so feature perturbations trade one for the
    // other exactly.
    Rng rng(97);
    const LabeledDataset data = random_dataset(rng, 6, 4, 8);
    const Matrix whitened = label_whiten(one_hot(data.labels, data.class_count));

    const double j_before =
        closed_form_regression(data.features, whitened, kDefaultMu).objective;
    const double t_before =
        lda_trace(scatter_matrixform(data.features, data.labels, data.class_count, kDefaultMu));

    Matrix perturbed = data.features;
    for (double& v : perturbed.data()) v += 0.05 * rng.normal();
    const double j_after = closed_form_regression(perturbed, whitened, kDefaultMu).objective;
    const double t_after =
        lda_trace(scatter_matrixform(perturbed, data.labels, data.class_count, kDefaultMu));

    CHECK(std::abs((j_after - j_before) + (t_after - t_before)) <= 1e-8);
    CHECK(rel_scalar_diff(j_before + t_before, j_after + t_after) <= 1e-10);
}
