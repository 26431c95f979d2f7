#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ldahash/data.hpp"

namespace ldahash::cli {

struct SyntheticSpec {
    std::string kind;  // "gaussian" | "rings"
    int classes = 10;
    int per_class = 100;
    int dim = 16;
    double separation = 20.0;
    double noise = 0.1;
};

struct IdxPair {
    std::string images;
    std::string labels;
};

/// Exactly one of the three sources may be set.
struct DataSource {
    std::optional<SyntheticSpec> synthetic;
    std::optional<std::string> csv_path;
    std::vector<IdxPair> idx_pairs;
};

struct ModelSection {
    std::string type = "ldah";  // ldah | dldah | lsh
    int code_bits = 16;
    double mu = 0.0005;
    double nu = 0.001;
    double learning_rate = 0.01;
    double momentum = 0.9;
    std::vector<std::size_t> hidden_dims{256};
    int batch_size = 64;
    int epochs = 100;
    std::string label_mode = "plain_Y";
    bool track_train_map = false;
};

struct ExperimentConfig {
    DataSource data;
    std::optional<SplitSpec> split;
    ModelSection model;
    int eval_radius = 2;
    std::string output_dir = "out";
    std::uint64_t seed = 1;
};

ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_string(const std::string& text);
std::string serialize_config(const ExperimentConfig& config);

/// Loads whatever the config's data source names (synthesis is seeded from
/// the config seed).
LabeledDataset load_config_dataset(const ExperimentConfig& config);

// Subcommand bodies. Validation and numeric failures surface as exceptions;
// the returned code is the process exit status for completed runs.
int run_synth(const std::string& config_path);
int run_train(const std::string& config_path);
int run_encode(const std::string& model_path, const std::string& data_path,
               const std::string& out_path);
int run_eval(const std::string& gallery_path, const std::string& queries_path,
             const std::string& labels_path, int radius, const std::string& out_dir);

/// Re-derives the algebraic identities on `trials` random instances and
/// reports the worst residual per family; nonzero exit when any residual
/// exceeds its tolerance. `corrupt_between` is a negative-control hook that
/// perturbs one scatter entry to prove the gate trips.
int run_verify(std::uint64_t seed, int trials, bool corrupt_between = false);

int run_bench(const std::string& config_path, const std::vector<int>& bit_widths);

}  // namespace ldahash::cli
