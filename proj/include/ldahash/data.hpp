#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ldahash/dataset.hpp"

namespace ldahash {

/// Isotropic Gaussian clusters: class means drawn uniformly on the sphere of
/// radius `separation`, unit-variance noise. Deterministic per seed.
LabeledDataset gen_gaussian_clusters(std::uint64_t seed, int classes, int per_class,
                                     int dim, double separation);

/// Two concentric 2-D rings (radius 1 and 3) with Gaussian radial noise.
LabeledDataset gen_rings(std::uint64_t seed, int per_class, double noise);

struct CsvDataset {
    LabeledDataset data;
    /// original label value per compact class index
    std::vector<long> label_values;
};

/// CSV with header "label,f0,...,f{d-1}". Labels are non-negative integers,
/// compacted to {0..c-1} in ascending original order; the mapping is
/// reported. Parse failures name the offending line.
CsvDataset load_csv_features(const std::string& path);

/// Writer matching load_csv_features (compact labels, %.17g floats).
void write_csv_features(const LabeledDataset& data, const std::string& path);

/// MNIST-convention IDX pair: images magic 0x00000803, labels magic
/// 0x00000801, big-endian dims, pixel bytes scaled to [0,1], images
/// flattened row-major.
LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path);

/// Column-wise concatenation; dimensions and class vocabularies must agree.
LabeledDataset concat_datasets(const LabeledDataset& a, const LabeledDataset& b);

struct SplitSpec {
    int queries_per_class = 0;
    int train_per_class = 0;
    std::uint64_t seed = 0;
};

/// query/train/gallery partition: per class a seeded shuffle marks
/// queries_per_class items as queries and train_per_class of the remainder
/// as training items; the gallery is everything except the queries (so the
/// training set is a gallery subset). Ids index into the source dataset.
struct SplitResult {
    LabeledDataset train;
    LabeledDataset query;
    LabeledDataset gallery;
    std::vector<std::int64_t> train_ids;
    std::vector<std::int64_t> query_ids;
    std::vector<std::int64_t> gallery_ids;
};

SplitResult split_protocol(const LabeledDataset& data, const SplitSpec& spec);

/// CSV of (source_id, role) rows; training items appear under both "train"
/// and "gallery".
void write_split_manifest(const SplitResult& split, const std::string& path);

}  // namespace ldahash
