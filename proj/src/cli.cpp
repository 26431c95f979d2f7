#include "ldahash/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "ldahash/errors.hpp"
#include "ldahash/eval.hpp"
#include "ldahash/ldah.hpp"
#include "ldahash/lsh.hpp"
#include "ldahash/network.hpp"
#include "ldahash/rng.hpp"
#include "ldahash/scatter.hpp"
#include "ldahash/serialize.hpp"

namespace ldahash::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kConfigFormatVersion = 1;

std::string format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

SyntheticSpec synthetic_from_json(const json& j) {
    SyntheticSpec spec;
    spec.kind = j.at("kind").get<std::string>();
    if (spec.kind != "gaussian" && spec.kind != "rings") {
        throw ConfigError("config: synthetic kind must be 'gaussian' or 'rings', got '" +
                          spec.kind + "'");
    }
    spec.classes = j.value("classes", spec.classes);
    spec.per_class = j.value("per_class", spec.per_class);
    spec.dim = j.value("dim", spec.dim);
    spec.separation = j.value("separation", spec.separation);
    spec.noise = j.value("noise", spec.noise);
    return spec;
}

json synthetic_to_json(const SyntheticSpec& spec) {
    return json{{"kind", spec.kind},         {"classes", spec.classes},
                {"per_class", spec.per_class}, {"dim", spec.dim},
                {"separation", spec.separation}, {"noise", spec.noise}};
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig config;
    const int version = j.value("format_version", kConfigFormatVersion);
    if (version != kConfigFormatVersion) {
        throw ConfigError("config: unsupported format_version " + std::to_string(version));
    }
    config.seed = j.value("seed", config.seed);
    config.output_dir = j.value("output_dir", config.output_dir);

    const json& data = j.at("data");
    int source_count = 0;
    if (data.contains("synthetic")) {
        config.data.synthetic = synthetic_from_json(data.at("synthetic"));
        ++source_count;
    }
    if (data.contains("csv")) {
        config.data.csv_path = data.at("csv").at("path").get<std::string>();
        ++source_count;
    }
    if (data.contains("idx")) {
        for (const json& pair : data.at("idx").at("pairs")) {
            config.data.idx_pairs.push_back(
                {pair.at("images").get<std::string>(), pair.at("labels").get<std::string>()});
        }
        if (config.data.idx_pairs.empty()) {
            throw ConfigError("config: data.idx.pairs must not be empty");
        }
        ++source_count;
    }
    if (source_count != 1) {
        throw ConfigError("config: exactly one data source required, found " +
                          std::to_string(source_count));
    }

    if (j.contains("split")) {
        SplitSpec split;
        split.queries_per_class = j.at("split").at("queries_per_class").get<int>();
        split.train_per_class = j.at("split").at("train_per_class").get<int>();
        split.seed = j.at("split").value("seed", config.seed);
        config.split = split;
    }

    if (j.contains("model")) {
        const json& model = j.at("model");
        config.model.type = model.at("type").get<std::string>();
        if (config.model.type != "ldah" && config.model.type != "dldah" &&
            config.model.type != "lsh") {
            throw ConfigError("config: model.type must be ldah, dldah, or lsh, got '" +
                              config.model.type + "'");
        }
        config.model.code_bits = model.value("code_bits", config.model.code_bits);
        config.model.mu = model.value("mu", config.model.mu);
        config.model.nu = model.value("nu", config.model.nu);
        config.model.learning_rate = model.value("learning_rate", config.model.learning_rate);
        config.model.momentum = model.value("momentum", config.model.momentum);
        if (model.contains("hidden_dims")) {
            config.model.hidden_dims = model.at("hidden_dims").get<std::vector<std::size_t>>();
        }
        config.model.batch_size = model.value("batch_size", config.model.batch_size);
        config.model.epochs = model.value("epochs", config.model.epochs);
        config.model.label_mode = model.value("label_mode", config.model.label_mode);
        if (config.model.label_mode != "plain_Y" && config.model.label_mode != "whitened_Y") {
            throw ConfigError("config: model.label_mode must be plain_Y or whitened_Y");
        }
        config.model.track_train_map =
            model.value("track_train_map", config.model.track_train_map);
    }

    if (j.contains("eval")) {
        config.eval_radius = j.at("eval").value("radius", config.eval_radius);
        if (config.eval_radius < 0) throw ConfigError("config: eval.radius must be >= 0");
    }
    return config;
}

json config_to_json(const ExperimentConfig& config) {
    json data;
    if (config.data.synthetic) data["synthetic"] = synthetic_to_json(*config.data.synthetic);
    if (config.data.csv_path) data["csv"] = json{{"path", *config.data.csv_path}};
    if (!config.data.idx_pairs.empty()) {
        json pairs = json::array();
        for (const IdxPair& pair : config.data.idx_pairs) {
            pairs.push_back(json{{"images", pair.images}, {"labels", pair.labels}});
        }
        data["idx"] = json{{"pairs", std::move(pairs)}};
    }
    json j{
        {"format_version", kConfigFormatVersion},
        {"seed", config.seed},
        {"output_dir", config.output_dir},
        {"data", std::move(data)},
        {"model",
         json{{"type", config.model.type},
              {"code_bits", config.model.code_bits},
              {"mu", config.model.mu},
              {"nu", config.model.nu},
              {"learning_rate", config.model.learning_rate},
              {"momentum", config.model.momentum},
              {"hidden_dims", config.model.hidden_dims},
              {"batch_size", config.model.batch_size},
              {"epochs", config.model.epochs},
              {"label_mode", config.model.label_mode},
              {"track_train_map", config.model.track_train_map}}},
        {"eval", json{{"radius", config.eval_radius}}},
    };
    if (config.split) {
        j["split"] = json{{"queries_per_class", config.split->queries_per_class},
                          {"train_per_class", config.split->train_per_class},
                          {"seed", config.split->seed}};
    }
    return j;
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

LabeledDataset load_data_file(const std::string& path) {
    const std::size_t comma = path.find(',');
    if (comma != std::string::npos) {
        return load_idx(path.substr(0, comma), path.substr(comma + 1));
    }
    return load_csv_features(path).data;
}

void ensure_output_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ValidationError("cannot create output directory " + dir + ": " + ec.message());
}

void write_labels_csv(const std::string& path, const SplitResult& split) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ValidationError("cannot open labels file for writing: " + path);
    out << "role,item_id,label\n";
    for (std::size_t k = 0; k < split.gallery_ids.size(); ++k) {
        out << "gallery," << split.gallery_ids[k] << ',' << split.gallery.labels[k] << "\n";
    }
    for (std::size_t k = 0; k < split.query_ids.size(); ++k) {
        out << "query," << split.query_ids[k] << ',' << split.query.labels[k] << "\n";
    }
}

void write_history_csv(const TrainHistory& history, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ValidationError("cannot open history file for writing: " + path);
    out << "epoch,total,data,ridge,atanh,mean_abs_alpha,train_map\n";
    for (const EpochRecord& record : history.epochs) {
        out << record.epoch << ',' << format_double(record.total) << ','
            << format_double(record.data) << ',' << format_double(record.ridge) << ','
            << format_double(record.atanh) << ',' << format_double(record.mean_abs_alpha)
            << ',' << (record.has_train_map ? format_double(record.train_map) : "") << "\n";
    }
}

NetworkConfig network_config_from_section(const ModelSection& section, std::size_t input_dim,
                                          std::uint64_t seed) {
    NetworkConfig config;
    config.input_dim = input_dim;
    config.hidden_dims = section.hidden_dims;
    config.code_bits = section.code_bits;
    config.mu = section.mu;
    config.nu = section.nu;
    config.learning_rate = section.learning_rate;
    config.momentum = section.momentum;
    config.batch_size = section.batch_size;
    config.epochs = section.epochs;
    config.seed = seed;
    config.label_mode = section.label_mode == "whitened_Y" ? LabelMode::WhitenedLabels
                                                           : LabelMode::PlainLabels;
    config.track_train_map = section.track_train_map;
    return config;
}

struct FittedModel {
    AnyModel model;
    std::optional<TrainHistory> history;
};

FittedModel fit_model(const ModelSection& section, const LabeledDataset& train_set,
                      std::uint64_t seed) {
    if (section.type == "ldah") {
        return {fit_ldah(train_set, section.code_bits, section.mu), std::nullopt};
    }
    if (section.type == "lsh") {
        return {fit_lsh(static_cast<int>(train_set.dim()), section.code_bits, seed),
                std::nullopt};
    }
    auto [model, history] =
        train(train_set, network_config_from_section(section, train_set.dim(), seed));
    return {std::move(model), std::move(history)};
}

std::map<std::pair<std::string, std::int64_t>, int> load_labels_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("labels file: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("labels file: empty file " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "role,item_id,label") {
        throw ParseError("labels file: expected header 'role,item_id,label' in " + path);
    }
    std::map<std::pair<std::string, std::int64_t>, int> labels;
    std::size_t line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream stream(line);
        std::string role, id_text, label_text;
        if (!std::getline(stream, role, ',') || !std::getline(stream, id_text, ',') ||
            !std::getline(stream, label_text)) {
            throw ParseError("labels file: malformed line " + std::to_string(line_number));
        }
        try {
            labels[{role, std::stoll(id_text)}] = std::stoi(label_text);
        } catch (const std::exception&) {
            throw ParseError("labels file: non-numeric field on line " +
                             std::to_string(line_number));
        }
    }
    return labels;
}

std::vector<int> labels_for_codes(
    const BinaryCodes& codes, const std::string& role,
    const std::map<std::pair<std::string, std::int64_t>, int>& labels) {
    std::vector<int> out(static_cast<std::size_t>(codes.item_count));
    for (std::size_t k = 0; k < out.size(); ++k) {
        const auto it = labels.find({role, codes.item_ids[k]});
        if (it == labels.end()) {
            throw ValidationError("labels file: no " + role + " label for item " +
                                  std::to_string(codes.item_ids[k]));
        }
        out[k] = it->second;
    }
    return out;
}

}  // namespace

ExperimentConfig parse_config_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& err) {
        throw ConfigError(std::string("config: invalid JSON: ") + err.what());
    }
    try {
        return config_from_json(j);
    } catch (const json::exception& err) {
        throw ConfigError(std::string("config: missing or mistyped field: ") + err.what());
    }
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_string(buffer.str());
}

std::string serialize_config(const ExperimentConfig& config) {
    return config_to_json(config).dump(2) + "\n";
}

LabeledDataset load_config_dataset(const ExperimentConfig& config) {
    if (config.data.synthetic) {
        const SyntheticSpec& spec = *config.data.synthetic;
        if (spec.kind == "gaussian") {
            return gen_gaussian_clusters(config.seed, spec.classes, spec.per_class, spec.dim,
                                         spec.separation);
        }
        return gen_rings(config.seed, spec.per_class, spec.noise);
    }
    if (config.data.csv_path) {
        return load_csv_features(*config.data.csv_path).data;
    }
    LabeledDataset data = load_idx(config.data.idx_pairs[0].images,
                                   config.data.idx_pairs[0].labels);
    for (std::size_t k = 1; k < config.data.idx_pairs.size(); ++k) {
        data = concat_datasets(
            data, load_idx(config.data.idx_pairs[k].images, config.data.idx_pairs[k].labels));
    }
    return data;
}

int run_synth(const std::string& config_path) {
    const ExperimentConfig config = parse_config_file(config_path);
    if (!config.data.synthetic) {
        throw ConfigError("synth: config must use a synthetic data source");
    }
    const LabeledDataset data = load_config_dataset(config);
    ensure_output_dir(config.output_dir);
    const fs::path out_dir(config.output_dir);
    write_csv_features(data, (out_dir / "dataset.csv").string());
    if (config.split) {
        const SplitResult split = split_protocol(data, *config.split);
        write_split_manifest(split, (out_dir / "split.csv").string());
        write_csv_features(split.train, (out_dir / "train.csv").string());
        write_csv_features(split.query, (out_dir / "query.csv").string());
        write_csv_features(split.gallery, (out_dir / "gallery.csv").string());
        write_labels_csv((out_dir / "labels.csv").string(), split);
    }
    std::cout << "synth: wrote " << data.item_count() << " items ("
              << data.class_count << " classes, dim " << data.dim() << ") to "
              << config.output_dir << "\n";
    return 0;
}

int run_train(const std::string& config_path) {
    const ExperimentConfig config = parse_config_file(config_path);
    const LabeledDataset data = load_config_dataset(config);
    ensure_output_dir(config.output_dir);
    const fs::path out_dir(config.output_dir);

    const LabeledDataset* train_set = &data;
    std::optional<SplitResult> split;
    if (config.split) {
        split = split_protocol(data, *config.split);
        train_set = &split->train;
        write_split_manifest(*split, (out_dir / "split.csv").string());
        write_labels_csv((out_dir / "labels.csv").string(), *split);
    }

    const FittedModel fitted = fit_model(config.model, *train_set, config.seed);
    save_model(fitted.model, (out_dir / "model.json").string());
    if (fitted.history) {
        write_history_csv(*fitted.history, (out_dir / "history.csv").string());
    }
    std::cout << "train: fitted " << config.model.type << " (" << config.model.code_bits
              << " bits) on " << train_set->item_count() << " items\n";
    return 0;
}

int run_encode(const std::string& model_path, const std::string& data_path,
               const std::string& out_path) {
    const AnyModel model = load_model(model_path);
    const LabeledDataset data = load_data_file(data_path);
    if (data.item_count() < 1) throw ValidationError("encode: dataset is empty");
    std::vector<std::int64_t> ids(data.item_count());
    std::iota(ids.begin(), ids.end(), std::int64_t{0});
    const BinaryCodes codes = encode_with_model(model, data.features, std::move(ids));
    write_codes_file(codes, out_path);
    std::cout << "encode: wrote " << codes.item_count << " codes of " << codes.code_bits
              << " bits to " << out_path << "\n";
    return 0;
}

int run_eval(const std::string& gallery_path, const std::string& queries_path,
             const std::string& labels_path, int radius, const std::string& out_dir) {
    const BinaryCodes gallery = read_codes_file(gallery_path);
    const BinaryCodes queries = read_codes_file(queries_path);
    if (gallery.code_bits != queries.code_bits) {
        throw ValidationError("eval: gallery and query code widths disagree");
    }
    const auto labels = load_labels_csv(labels_path);
    const std::vector<int> gallery_labels = labels_for_codes(gallery, "gallery", labels);
    const std::vector<int> query_labels = labels_for_codes(queries, "query", labels);

    const HammingIndex index(gallery);
    const EvalReport report = evaluate(index, queries, query_labels, gallery_labels, radius);
    ensure_output_dir(out_dir);
    const fs::path dir(out_dir);
    write_eval_summary(report, (dir / "summary.txt").string());
    write_eval_per_query_csv(report, (dir / "per_query.csv").string());
    std::cout << "eval: map " << report.map << ", radius-" << radius << " F "
              << report.mean_f_measure << " over " << report.included_query_count
              << " queries\n";
    return 0;
}

// ---------------------------------------------------------------------------
// verify: re-derive the identity families on random instances
// ---------------------------------------------------------------------------

namespace {

struct IdentityFamily {
    std::string name;
    double worst = 0.0;
    double tolerance = 0.0;
    bool pass() const { return worst <= tolerance; }
};

double relative_diff(const Matrix& a, const Matrix& b) {
    const double denom = std::max({max_abs(a), max_abs(b), 1e-300});
    return max_abs_diff(a, b) / denom;
}

double relative_scalar_diff(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0});
}

struct RandomInstance {
    Matrix features;
    std::vector<int> labels;
    int class_count = 0;
};

RandomInstance random_instance(Rng& rng, int max_dim, int max_classes, int max_per_class) {
    RandomInstance instance;
    instance.class_count = 2 + static_cast<int>(rng.bounded(max_classes - 1));
    const int dim = 3 + static_cast<int>(rng.bounded(max_dim - 2));
    std::size_t n = 0;
    std::vector<int> sizes(instance.class_count);
    for (int& s : sizes) {
        s = 1 + static_cast<int>(rng.bounded(max_per_class));
        n += static_cast<std::size_t>(s);
    }
    if (n < 2) sizes[0] += 2, n += 2;
    instance.features = Matrix(static_cast<std::size_t>(dim), n);
    for (double& v : instance.features.data()) v = rng.normal();
    instance.labels.reserve(n);
    for (int cls = 0; cls < instance.class_count; ++cls) {
        for (int k = 0; k < sizes[static_cast<std::size_t>(cls)]; ++k) {
            instance.labels.push_back(cls);
        }
    }
    return instance;
}

LabeledDataset to_dataset(const RandomInstance& instance) {
    LabeledDataset data;
    data.features = instance.features;
    data.labels = instance.labels;
    data.class_count = instance.class_count;
    return data;
}

// Central finite differences over every parameter of a tiny network.
double worst_gradient_error(Rng& rng) {
    LabeledDataset data;
    data.class_count = 2;
    const std::size_t m = 5;
    data.features = Matrix(3, m);
    for (double& v : data.features.data()) v = rng.normal();
    data.labels = {0, 1, 0, 1, 1};

    NetworkConfig config;
    config.input_dim = 3;
    config.hidden_dims = {4};
    config.code_bits = 2;
    config.batch_size = 5;
    config.epochs = 0;
    config.seed = rng.next_u64();
    auto [model, history] = train(data, config);
    (void)history;
    // Move alpha off its init and give biases mass so every path is live.
    for (std::size_t j = 0; j < model.alpha.size(); ++j) {
        model.alpha[j] = 0.7 + 0.3 * static_cast<double>(j);
    }
    for (auto& layer : model.layers) {
        for (double& b : layer.bias) b = rng.uniform(-0.1, 0.1);
    }
    const Matrix x = data.features;
    const Matrix y = one_hot(data.labels, data.class_count);

    const Gradients analytic = backward(model, x, y);
    std::vector<std::pair<double*, const double*>> params;
    auto add_matrix = [&params](Matrix& p, const Matrix& g) {
        auto pd = p.data();
        auto gd = g.data();
        for (std::size_t i = 0; i < pd.size(); ++i) params.emplace_back(&pd[i], &gd[i]);
    };
    auto add_vector = [&params](std::vector<double>& p, const std::vector<double>& g) {
        for (std::size_t i = 0; i < p.size(); ++i) params.emplace_back(&p[i], &g[i]);
    };
    Gradients& mutable_analytic = const_cast<Gradients&>(analytic);
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        add_matrix(model.layers[l].weights, mutable_analytic.layers[l].weights);
        add_vector(model.layers[l].bias, mutable_analytic.layers[l].bias);
    }
    add_vector(model.alpha, mutable_analytic.alpha);
    add_matrix(model.regression_weights, mutable_analytic.regression_weights);
    add_vector(model.regression_bias, mutable_analytic.regression_bias);

    const double step = 1e-5;
    double worst = 0.0;
    for (auto& [param, grad] : params) {
        const double saved = *param;
        *param = saved + step;
        const double up = loss(model, x, y).total;
        *param = saved - step;
        const double down = loss(model, x, y).total;
        *param = saved;
        const double fd = (up - down) / (2.0 * step);
        const double err = std::abs(fd - *grad) / std::max(1.0, std::abs(*grad));
        worst = std::max(worst, err);
    }
    return worst;
}

}  // namespace

int run_verify(std::uint64_t seed, int trials, bool corrupt_between) {
    if (trials < 1) throw ValidationError("verify: trials must be >= 1");
    Rng rng(seed);
    IdentityFamily form_equivalence{"scatter form equivalence (direct vs matrix)", 0.0, 1e-9};
    IdentityFamily additivity{"total = within + between", 0.0, 1e-9};
    IdentityFamily chain{"between-scatter chain (three literal forms)", 0.0, 1e-9};
    IdentityFamily frobenius{"trace = Frobenius forms, per-class weighting", 0.0, 1e-9};
    IdentityFamily regression_identity{"regression optimum + trace = label constant", 0.0,
                                       1e-8};
    IdentityFamily gradients{"analytic gradients vs central differences", 0.0, 1e-4};

    const double mu = kDefaultMu;
    for (int trial = 0; trial < trials; ++trial) {
        const RandomInstance instance = random_instance(rng, 16, 9, 20);
        const LabeledDataset data = to_dataset(instance);
        const Matrix& x = instance.features;
        const std::vector<int>& labels = instance.labels;
        const int c = instance.class_count;

        ScatterSet direct = scatter_direct(data, mu);
        const ScatterSet matrix_form = scatter_matrixform(x, labels, c, mu);
        if (corrupt_between) direct.between(0, 0) += 1e-3;

        form_equivalence.worst = std::max({form_equivalence.worst,
                                           relative_diff(direct.within, matrix_form.within),
                                           relative_diff(direct.between, matrix_form.between),
                                           relative_diff(direct.total, matrix_form.total)});
        additivity.worst = std::max(
            {additivity.worst,
             relative_diff(direct.total, direct.within + direct.between),
             relative_diff(matrix_form.total, matrix_form.within + matrix_form.between)});

        // Literal three-route chain.
        const IndicatorMatrices ind = indicator_matrices(labels, c);
        const Matrix diff_weights = ind.class_block - ind.uniform;  // A^w - A^t
        const Matrix route1 = matmul(matmul(x, diff_weights), transpose(x));
        const Matrix hawh = matmul(matmul(ind.centering, ind.class_block), ind.centering);
        const Matrix route2 = matmul(matmul(x, hawh), transpose(x));
        const Matrix y = one_hot(labels, c);
        const Matrix xh = matmul(x, ind.centering);
        const Matrix xhy = matmul(xh, y);
        Matrix xhy_scaled = xhy;  // X H Y (Y^T Y)^(-1)
        const std::vector<std::size_t> sizes = data.class_sizes();
        for (std::size_t cls = 0; cls < sizes.size(); ++cls) {
            const double inv = 1.0 / static_cast<double>(sizes[cls]);
            for (std::size_t row = 0; row < xhy_scaled.rows(); ++row) {
                xhy_scaled(row, cls) *= inv;
            }
        }
        const Matrix route3 = matmul_a_bt(xhy_scaled, xhy);
        chain.worst = std::max({chain.worst, relative_diff(route1, route2),
                                relative_diff(route2, route3)});

        // Frobenius-form identities against their trace counterparts.
        const FrobeniusObjective plain = frobenius_form(x, labels, c, mu, false);
        const FrobeniusObjective whitened = frobenius_form(x, labels, c, mu, true);
        ScatterSet plain_scatters = matrix_form;
        plain_scatters.between = between_scatter_label_form(x, labels, c, false);
        frobenius.worst = std::max(
            {frobenius.worst, relative_scalar_diff(plain.total, lda_trace(plain_scatters)),
             relative_scalar_diff(whitened.total, lda_trace(matrix_form))});
        double per_class_sum_plain = 0.0;
        double per_class_sum_whitened = 0.0;
        for (std::size_t cls = 0; cls < sizes.size(); ++cls) {
            per_class_sum_plain += plain.per_class[cls];
            per_class_sum_whitened += whitened.per_class[cls];
            frobenius.worst = std::max(
                frobenius.worst,
                relative_scalar_diff(plain.per_class[cls],
                                     static_cast<double>(sizes[cls]) *
                                         whitened.per_class[cls]));
        }
        frobenius.worst =
            std::max({frobenius.worst, relative_scalar_diff(per_class_sum_plain, plain.total),
                      relative_scalar_diff(per_class_sum_whitened, whitened.total)});

        regression_identity.worst =
            std::max(regression_identity.worst,
                     regression_trace_identity_residual(x, labels, c, mu));

        gradients.worst = std::max(gradients.worst, worst_gradient_error(rng));
    }

    const IdentityFamily families[] = {form_equivalence, additivity,       chain,
                                       frobenius,        regression_identity, gradients};
    bool all_pass = true;
    std::cout << "verification over " << trials << " random instances (seed " << seed
              << ")\n";
    for (const IdentityFamily& family : families) {
        std::cout << (family.pass() ? "  [ok]   " : "  [FAIL] ") << family.name
                  << ": max residual " << format_double(family.worst) << " (tolerance "
                  << format_double(family.tolerance) << ")\n";
        all_pass = all_pass && family.pass();
    }
    return all_pass ? 0 : 2;
}

// ---------------------------------------------------------------------------
// bench: train+encode+eval per method per bit width
// ---------------------------------------------------------------------------

int run_bench(const std::string& config_path, const std::vector<int>& bit_widths) {
    if (bit_widths.empty()) throw ValidationError("bench: at least one bit width required");
    ExperimentConfig config = parse_config_file(config_path);
    if (!config.split) throw ConfigError("bench: config must provide a split section");

    const LabeledDataset data = load_config_dataset(config);
    const SplitResult split = split_protocol(data, *config.split);
    ensure_output_dir(config.output_dir);
    const fs::path out_dir(config.output_dir);
    write_split_manifest(split, (out_dir / "split.csv").string());
    write_labels_csv((out_dir / "labels.csv").string(), split);

    const std::vector<std::string> methods = {"lsh", "ldah", "dldah"};
    std::map<std::string, std::vector<std::string>> map_rows;
    for (const std::string& method : methods) {
        for (int bits : bit_widths) {
            ModelSection section = config.model;
            section.type = method;
            section.code_bits = bits;
            if (method == "ldah" && static_cast<std::size_t>(bits) > split.train.dim()) {
                // The linear model cannot exceed the feature dimension.
                map_rows[method].push_back("N/A");
                std::cout << "bench: " << method << " r=" << bits
                          << " infeasible (dim " << split.train.dim() << "), N/A\n";
                continue;
            }
            const FittedModel fitted = fit_model(section, split.train, config.seed);

            const fs::path combo_dir = out_dir / (method + "_" + std::to_string(bits) + "bit");
            ensure_output_dir(combo_dir.string());
            save_model(fitted.model, (combo_dir / "model.json").string());
            if (fitted.history) {
                write_history_csv(*fitted.history, (combo_dir / "history.csv").string());
            }

            const BinaryCodes gallery_codes = encode_with_model(
                fitted.model, split.gallery.features,
                std::vector<std::int64_t>(split.gallery_ids));
            const BinaryCodes query_codes = encode_with_model(
                fitted.model, split.query.features, std::vector<std::int64_t>(split.query_ids));
            write_codes_file(gallery_codes, (combo_dir / "gallery.codes").string());
            write_codes_file(query_codes, (combo_dir / "query.codes").string());

            const HammingIndex index(gallery_codes);
            const EvalReport report = evaluate(index, query_codes, split.query.labels,
                                               split.gallery.labels, config.eval_radius);
            write_eval_summary(report, (combo_dir / "summary.txt").string());
            write_eval_per_query_csv(report, (combo_dir / "per_query.csv").string());
            map_rows[method].push_back(format_double(report.map));
            std::cout << "bench: " << method << " r=" << bits << " map "
                      << format_double(report.map) << "\n";
        }
    }

    std::ofstream table((out_dir / "bench_map.csv").string(), std::ios::trunc);
    if (!table) throw ValidationError("bench: cannot open bench_map.csv for writing");
    table << "method";
    for (int bits : bit_widths) table << ',' << bits;
    table << "\n";
    for (const std::string& method : methods) {
        table << method;
        for (const std::string& value : map_rows[method]) table << ',' << value;
        table << "\n";
    }
    return 0;
}

}  // namespace ldahash::cli
