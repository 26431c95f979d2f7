#include "ldahash/serialize.hpp"

#include <fstream>

#include <json.hpp>

#include "ldahash/errors.hpp"

namespace ldahash {

namespace {

using nlohmann::json;

constexpr int kModelFormatVersion = 1;

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& rows, const std::string& field) {
    if (!rows.is_array() || rows.empty() || !rows[0].is_array()) {
        throw ParseError("model file: field '" + field + "' is not a matrix");
    }
    const std::size_t r = rows.size();
    const std::size_t c = rows[0].size();
    std::vector<double> entries;
    entries.reserve(r * c);
    for (const json& row : rows) {
        if (!row.is_array() || row.size() != c) {
            throw ParseError("model file: ragged matrix in field '" + field + "'");
        }
        for (const json& v : row) entries.push_back(v.get<double>());
    }
    return Matrix(r, c, std::move(entries));
}

json network_config_to_json(const NetworkConfig& config) {
    return json{
        {"input_dim", config.input_dim},
        {"hidden_dims", config.hidden_dims},
        {"code_bits", config.code_bits},
        {"mu", config.mu},
        {"nu", config.nu},
        {"learning_rate", config.learning_rate},
        {"momentum", config.momentum},
        {"batch_size", config.batch_size},
        {"epochs", config.epochs},
        {"seed", config.seed},
        {"label_mode",
         config.label_mode == LabelMode::PlainLabels ? "plain_Y" : "whitened_Y"},
        {"track_train_map", config.track_train_map},
    };
}

NetworkConfig network_config_from_json(const json& j) {
    NetworkConfig config;
    config.input_dim = j.at("input_dim").get<std::size_t>();
    config.hidden_dims = j.at("hidden_dims").get<std::vector<std::size_t>>();
    config.code_bits = j.at("code_bits").get<int>();
    config.mu = j.at("mu").get<double>();
    config.nu = j.at("nu").get<double>();
    config.learning_rate = j.at("learning_rate").get<double>();
    config.momentum = j.at("momentum").get<double>();
    config.batch_size = j.at("batch_size").get<int>();
    config.epochs = j.at("epochs").get<int>();
    config.seed = j.at("seed").get<std::uint64_t>();
    const std::string mode = j.at("label_mode").get<std::string>();
    if (mode == "plain_Y") {
        config.label_mode = LabelMode::PlainLabels;
    } else if (mode == "whitened_Y") {
        config.label_mode = LabelMode::WhitenedLabels;
    } else {
        throw ParseError("model file: unknown label_mode '" + mode + "'");
    }
    config.track_train_map = j.value("track_train_map", false);
    return config;
}

json model_to_json(const LinearHashModel& model) {
    return json{
        {"format_version", kModelFormatVersion},
        {"model_type", "ldah"},
        {"input_dim", model.projection.rows()},
        {"code_bits", model.code_bits},
        {"mu", model.mu},
        {"projection", matrix_to_json(model.projection)},
        {"thresholds", model.thresholds},
        {"eigenvalues", model.eigenvalues},
    };
}

json model_to_json(const DeepHashModel& model) {
    json layers = json::array();
    for (const auto& layer : model.layers) {
        layers.push_back(json{{"weights", matrix_to_json(layer.weights)},
                              {"bias", layer.bias}});
    }
    return json{
        {"format_version", kModelFormatVersion},
        {"model_type", "dldah"},
        {"config", network_config_to_json(model.config)},
        {"class_count", model.class_count},
        {"layers", std::move(layers)},
        {"alpha", model.alpha},
        {"regression_weights", matrix_to_json(model.regression_weights)},
        {"regression_bias", model.regression_bias},
    };
}

json model_to_json(const LshModel& model) {
    return json{
        {"format_version", kModelFormatVersion},
        {"model_type", "lsh"},
        {"input_dim", model.projection.rows()},
        {"code_bits", model.projection.cols()},
        {"seed", model.seed},
        {"projection", matrix_to_json(model.projection)},
    };
}

}  // namespace

void save_model(const AnyModel& model, const std::string& path) {
    const json j = std::visit([](const auto& m) { return model_to_json(m); }, model);
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ValidationError("cannot open model file for writing: " + path);
    out << j.dump(2) << "\n";
}

AnyModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open model file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& err) {
        throw ParseError("model file: invalid JSON in " + path + ": " + err.what());
    }
    try {
        const int version = j.at("format_version").get<int>();
        if (version != kModelFormatVersion) {
            throw ParseError("model file: unsupported format version " +
                             std::to_string(version));
        }
        const std::string type = j.at("model_type").get<std::string>();
        if (type == "ldah") {
            LinearHashModel model;
            model.projection = matrix_from_json(j.at("projection"), "projection");
            model.thresholds = j.at("thresholds").get<std::vector<double>>();
            model.eigenvalues = j.at("eigenvalues").get<std::vector<double>>();
            model.mu = j.at("mu").get<double>();
            model.code_bits = j.at("code_bits").get<int>();
            return model;
        }
        if (type == "dldah") {
            DeepHashModel model;
            model.config = network_config_from_json(j.at("config"));
            model.class_count = j.at("class_count").get<int>();
            for (const json& layer_json : j.at("layers")) {
                DeepHashModel::Layer layer;
                layer.weights = matrix_from_json(layer_json.at("weights"), "layer weights");
                layer.bias = layer_json.at("bias").get<std::vector<double>>();
                model.layers.push_back(std::move(layer));
            }
            model.alpha = j.at("alpha").get<std::vector<double>>();
            model.regression_weights =
                matrix_from_json(j.at("regression_weights"), "regression_weights");
            model.regression_bias = j.at("regression_bias").get<std::vector<double>>();
            return model;
        }
        if (type == "lsh") {
            LshModel model;
            model.projection = matrix_from_json(j.at("projection"), "projection");
            model.seed = j.at("seed").get<std::uint64_t>();
            return model;
        }
        throw ParseError("model file: unknown model_type '" + type + "'");
    } catch (const json::exception& err) {
        throw ParseError("model file: missing or mistyped field in " + path + ": " +
                         err.what());
    }
}

std::size_t model_input_dim(const AnyModel& model) {
    if (const auto* linear = std::get_if<LinearHashModel>(&model)) {
        return linear->projection.rows();
    }
    if (const auto* deep = std::get_if<DeepHashModel>(&model)) {
        return deep->config.input_dim;
    }
    return std::get<LshModel>(model).projection.rows();
}

int model_code_bits(const AnyModel& model) {
    if (const auto* linear = std::get_if<LinearHashModel>(&model)) {
        return linear->code_bits;
    }
    if (const auto* deep = std::get_if<DeepHashModel>(&model)) {
        return deep->config.code_bits;
    }
    return static_cast<int>(std::get<LshModel>(model).projection.cols());
}

const char* model_type_name(const AnyModel& model) {
    if (std::holds_alternative<LinearHashModel>(model)) return "ldah";
    if (std::holds_alternative<DeepHashModel>(model)) return "dldah";
    return "lsh";
}

BinaryCodes encode_with_model(const AnyModel& model, const Matrix& x,
                              std::vector<std::int64_t> item_ids) {
    if (const auto* linear = std::get_if<LinearHashModel>(&model)) {
        return encode_linear(*linear, x, std::move(item_ids));
    }
    if (const auto* deep = std::get_if<DeepHashModel>(&model)) {
        return encode_deep(*deep, x, std::move(item_ids));
    }
    return encode_lsh(std::get<LshModel>(model), x, std::move(item_ids));
}

}  // namespace ldahash
