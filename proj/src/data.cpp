#include "ldahash/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "ldahash/errors.hpp"
#include "ldahash/rng.hpp"

namespace ldahash {

LabeledDataset gen_gaussian_clusters(std::uint64_t seed, int classes, int per_class,
                                     int dim, double separation) {
    if (classes < 2) throw ValidationError("gen_gaussian_clusters: need at least 2 classes");
    if (dim < 2) throw ValidationError("gen_gaussian_clusters: need dim >= 2");
    if (per_class < 1) throw ValidationError("gen_gaussian_clusters: per_class must be >= 1");
    if (!(separation > 0.0)) {
        throw ValidationError("gen_gaussian_clusters: separation must be positive");
    }
    Rng rng(seed);
    const std::size_t d = static_cast<std::size_t>(dim);
    const std::size_t c = static_cast<std::size_t>(classes);
    const std::size_t n = c * static_cast<std::size_t>(per_class);

    // Class means: standard normal direction scaled onto the radius-s sphere.
    Matrix means(d, c);
    for (std::size_t cls = 0; cls < c; ++cls) {
        double norm_sq = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double v = rng.normal();
            means(j, cls) = v;
            norm_sq += v * v;
        }
        const double f = separation / std::sqrt(norm_sq);
        for (std::size_t j = 0; j < d; ++j) means(j, cls) *= f;
    }

    LabeledDataset data;
    data.class_count = classes;
    data.features = Matrix(d, n);
    data.labels.resize(n);
    std::size_t item = 0;
    for (std::size_t cls = 0; cls < c; ++cls) {
        for (int k = 0; k < per_class; ++k, ++item) {
            data.labels[item] = static_cast<int>(cls);
            for (std::size_t j = 0; j < d; ++j) {
                data.features(j, item) = means(j, cls) + rng.normal();
            }
        }
    }
    return data;
}

LabeledDataset gen_rings(std::uint64_t seed, int per_class, double noise) {
    if (per_class < 1) throw ValidationError("gen_rings: per_class must be >= 1");
    if (noise < 0.0) throw ValidationError("gen_rings: noise must be >= 0");
    Rng rng(seed);
    const std::size_t n = 2 * static_cast<std::size_t>(per_class);
    LabeledDataset data;
    data.class_count = 2;
    data.features = Matrix(2, n);
    data.labels.resize(n);
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    std::size_t item = 0;
    for (int cls = 0; cls < 2; ++cls) {
        const double base_radius = cls == 0 ? 1.0 : 3.0;
        for (int k = 0; k < per_class; ++k, ++item) {
            const double angle = kTwoPi * rng.uniform();
            const double radius = base_radius + noise * rng.normal();
            data.labels[item] = cls;
            data.features(0, item) = radius * std::cos(angle);
            data.features(1, item) = radius * std::sin(angle);
        }
    }
    return data;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream stream(line);
    while (std::getline(stream, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double parse_double_field(const std::string& field, std::size_t line_number) {
    std::size_t consumed = 0;
    double value = 0.0;
    try {
        value = std::stod(field, &consumed);
    } catch (const std::exception&) {
        throw ParseError("csv: non-numeric field '" + field + "' on line " +
                         std::to_string(line_number));
    }
    if (consumed != field.size()) {
        throw ParseError("csv: trailing junk in field '" + field + "' on line " +
                         std::to_string(line_number));
    }
    return value;
}

}  // namespace

CsvDataset load_csv_features(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("csv: empty file " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const std::vector<std::string> header = split_fields(line);
    if (header.empty() || header[0] != "label") {
        throw ParseError("csv: header must start with 'label' in " + path);
    }
    const std::size_t dim = header.size() - 1;
    if (dim == 0) throw ParseError("csv: no feature columns in " + path);
    for (std::size_t j = 0; j < dim; ++j) {
        if (header[j + 1] != "f" + std::to_string(j)) {
            throw ParseError("csv: expected header column f" + std::to_string(j) + ", got '" +
                             header[j + 1] + "'");
        }
    }

    std::vector<long> raw_labels;
    std::vector<double> values;  // row-major item rows, transposed later
    std::size_t line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_fields(line);
        if (fields.size() != dim + 1) {
            throw ParseError("csv: line " + std::to_string(line_number) + " has " +
                             std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(dim + 1));
        }
        long label = 0;
        std::size_t consumed = 0;
        try {
            label = std::stol(fields[0], &consumed);
        } catch (const std::exception&) {
            throw ParseError("csv: non-integer label on line " + std::to_string(line_number));
        }
        if (consumed != fields[0].size() || label < 0) {
            throw ParseError("csv: label must be a non-negative integer on line " +
                             std::to_string(line_number));
        }
        raw_labels.push_back(label);
        for (std::size_t j = 0; j < dim; ++j) {
            values.push_back(parse_double_field(fields[j + 1], line_number));
        }
    }
    if (raw_labels.empty()) throw ParseError("csv: no data rows in " + path);

    // Compact labels in ascending original order.
    std::map<long, int> compact;
    for (long raw : raw_labels) compact.emplace(raw, 0);
    CsvDataset result;
    result.label_values.reserve(compact.size());
    for (auto& [raw, index] : compact) {
        index = static_cast<int>(result.label_values.size());
        result.label_values.push_back(raw);
    }

    const std::size_t n = raw_labels.size();
    result.data.class_count = static_cast<int>(compact.size());
    result.data.features = Matrix(dim, n);
    result.data.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        result.data.labels[i] = compact[raw_labels[i]];
        for (std::size_t j = 0; j < dim; ++j) {
            result.data.features(j, i) = values[i * dim + j];
        }
    }
    result.data.features.require_finite("csv features");
    return result;
}

void write_csv_features(const LabeledDataset& data, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ValidationError("csv: cannot open " + path + " for writing");
    out << "label";
    for (std::size_t j = 0; j < data.dim(); ++j) out << ",f" << j;
    out << "\n";
    char buf[64];
    for (std::size_t i = 0; i < data.item_count(); ++i) {
        out << data.labels[i];
        for (std::size_t j = 0; j < data.dim(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", data.features(j, i));
            out << ',' << buf;
        }
        out << "\n";
    }
}

namespace {

std::uint32_t read_be32(std::istream& in, const std::string& path) {
    unsigned char bytes[4];
    in.read(reinterpret_cast<char*>(bytes), 4);
    if (!in) throw ParseError("idx: truncated header in " + path);
    return (static_cast<std::uint32_t>(bytes[0]) << 24) |
           (static_cast<std::uint32_t>(bytes[1]) << 16) |
           (static_cast<std::uint32_t>(bytes[2]) << 8) | static_cast<std::uint32_t>(bytes[3]);
}

}  // namespace

LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream images(images_path, std::ios::binary);
    if (!images) throw ParseError("idx: cannot open " + images_path);
    if (read_be32(images, images_path) != 0x00000803u) {
        throw ParseError("idx: bad magic in image file " + images_path);
    }
    const std::uint32_t image_count = read_be32(images, images_path);
    const std::uint32_t rows = read_be32(images, images_path);
    const std::uint32_t cols = read_be32(images, images_path);

    std::ifstream labels(labels_path, std::ios::binary);
    if (!labels) throw ParseError("idx: cannot open " + labels_path);
    if (read_be32(labels, labels_path) != 0x00000801u) {
        throw ParseError("idx: bad magic in label file " + labels_path);
    }
    const std::uint32_t label_count = read_be32(labels, labels_path);
    if (label_count != image_count) {
        throw ParseError("idx: image count " + std::to_string(image_count) +
                         " does not match label count " + std::to_string(label_count));
    }
    if (image_count == 0 || rows == 0 || cols == 0) {
        throw ParseError("idx: empty dimensions in " + images_path);
    }

    const std::size_t dim = static_cast<std::size_t>(rows) * cols;
    const std::size_t n = image_count;
    std::vector<unsigned char> pixel_row(dim);
    LabeledDataset data;
    data.features = Matrix(dim, n);
    data.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        images.read(reinterpret_cast<char*>(pixel_row.data()),
                    static_cast<std::streamsize>(dim));
        if (!images) throw ParseError("idx: truncated image payload in " + images_path);
        for (std::size_t j = 0; j < dim; ++j) {
            data.features(j, i) = static_cast<double>(pixel_row[j]) / 255.0;
        }
    }
    std::vector<unsigned char> label_bytes(n);
    labels.read(reinterpret_cast<char*>(label_bytes.data()), static_cast<std::streamsize>(n));
    if (!labels) throw ParseError("idx: truncated label payload in " + labels_path);
    int max_label = 0;
    for (std::size_t i = 0; i < n; ++i) {
        data.labels[i] = label_bytes[i];
        max_label = std::max(max_label, data.labels[i]);
    }
    data.class_count = max_label + 1;
    return data;
}

LabeledDataset concat_datasets(const LabeledDataset& a, const LabeledDataset& b) {
    if (a.dim() != b.dim()) throw DimensionError("concat_datasets: dimensions disagree");
    LabeledDataset out;
    out.class_count = std::max(a.class_count, b.class_count);
    out.features = Matrix(a.dim(), a.item_count() + b.item_count());
    for (std::size_t j = 0; j < a.dim(); ++j) {
        double* row = out.features.row_ptr(j);
        const double* ra = a.features.row_ptr(j);
        const double* rb = b.features.row_ptr(j);
        std::copy(ra, ra + a.item_count(), row);
        std::copy(rb, rb + b.item_count(), row + a.item_count());
    }
    out.labels = a.labels;
    out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
    return out;
}

namespace {

LabeledDataset gather(const LabeledDataset& source, const std::vector<std::int64_t>& ids) {
    LabeledDataset out;
    out.class_count = source.class_count;
    out.features = Matrix(source.dim(), ids.size());
    out.labels.resize(ids.size());
    for (std::size_t k = 0; k < ids.size(); ++k) {
        const std::size_t src = static_cast<std::size_t>(ids[k]);
        out.labels[k] = source.labels[src];
        for (std::size_t j = 0; j < source.dim(); ++j) {
            out.features(j, k) = source.features(j, src);
        }
    }
    return out;
}

}  // namespace

SplitResult split_protocol(const LabeledDataset& data, const SplitSpec& spec) {
    data.validate();
    if (spec.queries_per_class < 1 || spec.train_per_class < 1) {
        throw ValidationError("split: queries_per_class and train_per_class must be >= 1");
    }
    const std::vector<std::size_t> sizes = data.class_sizes();
    const std::size_t need = static_cast<std::size_t>(spec.queries_per_class) +
                             static_cast<std::size_t>(spec.train_per_class);
    for (std::size_t cls = 0; cls < sizes.size(); ++cls) {
        if (sizes[cls] < need) {
            throw ValidationError("split: class " + std::to_string(cls) + " has " +
                                  std::to_string(sizes[cls]) + " items, needs " +
                                  std::to_string(need));
        }
    }

    Rng rng(spec.seed);
    std::vector<char> is_query(data.item_count(), 0);
    std::vector<char> is_train(data.item_count(), 0);
    for (int cls = 0; cls < data.class_count; ++cls) {
        std::vector<std::int64_t> members;
        for (std::size_t i = 0; i < data.item_count(); ++i) {
            if (data.labels[i] == cls) members.push_back(static_cast<std::int64_t>(i));
        }
        rng.shuffle(members);
        for (int k = 0; k < spec.queries_per_class; ++k) {
            is_query[static_cast<std::size_t>(members[static_cast<std::size_t>(k)])] = 1;
        }
        for (int k = 0; k < spec.train_per_class; ++k) {
            const std::size_t idx = static_cast<std::size_t>(spec.queries_per_class + k);
            is_train[static_cast<std::size_t>(members[idx])] = 1;
        }
    }

    SplitResult result;
    for (std::size_t i = 0; i < data.item_count(); ++i) {
        const auto id = static_cast<std::int64_t>(i);
        if (is_query[i]) {
            result.query_ids.push_back(id);
        } else {
            result.gallery_ids.push_back(id);
            if (is_train[i]) result.train_ids.push_back(id);
        }
    }
    result.train = gather(data, result.train_ids);
    result.query = gather(data, result.query_ids);
    result.gallery = gather(data, result.gallery_ids);
    return result;
}

void write_split_manifest(const SplitResult& split, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ValidationError("split manifest: cannot open " + path + " for writing");
    out << "source_id,role\n";
    for (std::int64_t id : split.query_ids) out << id << ",query\n";
    for (std::int64_t id : split.gallery_ids) out << id << ",gallery\n";
    for (std::int64_t id : split.train_ids) out << id << ",train\n";
}

}  // namespace ldahash
