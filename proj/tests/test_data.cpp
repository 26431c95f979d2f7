#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>

#include "helpers.hpp"
#include "ldahash/data.hpp"
#include "ldahash/errors.hpp"

using namespace ldahash;

namespace {

namespace fs = std::filesystem;

fs::path temp_file(const std::string& name) {
    return fs::temp_directory_path() / name;
}

// Test-only IDX writer for round-trip checks.
void write_be32(std::ofstream& out, std::uint32_t value) {
    const unsigned char bytes[4] = {static_cast<unsigned char>(value >> 24),
                                    static_cast<unsigned char>(value >> 16),
                                    static_cast<unsigned char>(value >> 8),
                                    static_cast<unsigned char>(value)};
    out.write(reinterpret_cast<const char*>(bytes), 4);
}

void write_idx_pair(const fs::path& images_path, const fs::path& labels_path,
                    const std::vector<std::vector<unsigned char>>& images,
                    const std::vector<unsigned char>& labels, std::uint32_t rows,
                    std::uint32_t cols, std::uint32_t images_magic = 0x00000803u,
                    std::uint32_t labels_magic = 0x00000801u) {
    std::ofstream images_out(images_path, std::ios::binary | std::ios::trunc);
    write_be32(images_out, images_magic);
    write_be32(images_out, static_cast<std::uint32_t>(images.size()));
    write_be32(images_out, rows);
    write_be32(images_out, cols);
    for (const auto& image : images) {
        images_out.write(reinterpret_cast<const char*>(image.data()),
                         static_cast<std::streamsize>(image.size()));
    }
    std::ofstream labels_out(labels_path, std::ios::binary | std::ios::trunc);
    write_be32(labels_out, labels_magic);
    write_be32(labels_out, static_cast<std::uint32_t>(labels.size()));
    labels_out.write(reinterpret_cast<const char*>(labels.data()),
                     static_cast<std::streamsize>(labels.size()));
}

}  // namespace

TEST_CASE("gaussian cluster generator") {
    CHECK_THROWS_AS(gen_gaussian_clusters(1, 2, 10, 4, 0.0), ValidationError);
    CHECK_THROWS_AS(gen_gaussian_clusters(1, 1, 10, 4, 1.0), ValidationError);
    CHECK_THROWS_AS(gen_gaussian_clusters(1, 2, 10, 1, 1.0), ValidationError);

    const LabeledDataset a = gen_gaussian_clusters(7, 3, 5, 4, 10.0);
    const LabeledDataset b = gen_gaussian_clusters(7, 3, 5, 4, 10.0);
    CHECK(test_support::bitwise_equal(a.features, b.features));
    CHECK(a.labels == b.labels);
    CHECK(a.item_count() == 15);
    CHECK(a.dim() == 4);
    a.validate();

    const LabeledDataset c = gen_gaussian_clusters(8, 3, 5, 4, 10.0);
    CHECK_FALSE(test_support::bitwise_equal(a.features, c.features));
}

TEST_CASE("ring generator") {
    const LabeledDataset clean = gen_rings(5, 50, 0.0);
    for (std::size_t i = 0; i < clean.item_count(); ++i) {
        const double norm = std::hypot(clean.features(0, i), clean.features(1, i));
        const double expected = clean.labels[i] == 0 ? 1.0 : 3.0;
        CHECK(std::abs(norm - expected) <= 1e-12);
    }
    const LabeledDataset a = gen_rings(9, 20, 0.1);
    const LabeledDataset b = gen_rings(9, 20, 0.1);
    CHECK(test_support::bitwise_equal(a.features, b.features));
    CHECK_THROWS_AS(gen_rings(1, 10, -0.5), ValidationError);
}

TEST_CASE("csv load/save round trip") {
    LabeledDataset data;
    data.class_count = 2;
    data.features = Matrix::from_rows({{0.125, -3.5, 1e-17}, {2.0, 0.1 + 0.2, 7.0}});
    data.labels = {0, 1, 0};

    const fs::path path = temp_file("ldahash_roundtrip.csv");
    write_csv_features(data, path.string());
    const CsvDataset loaded = load_csv_features(path.string());
    CHECK(loaded.data.labels == data.labels);
    CHECK(loaded.data.class_count == 2);
    CHECK(max_abs_diff(loaded.data.features, data.features) <= 1e-12);
    fs::remove(path);
}

TEST_CASE("csv label compaction reports the mapping") {
    const fs::path path = temp_file("ldahash_compact.csv");
    {
        std::ofstream out(path);
        out << "label,f0\n10,1.5\n3,2.5\n10,3.5\n";
    }
    const CsvDataset loaded = load_csv_features(path.string());
    CHECK(loaded.label_values == std::vector<long>{3, 10});
    CHECK(loaded.data.labels == std::vector<int>{1, 0, 1});
    fs::remove(path);
}

TEST_CASE("csv parse errors name the line") {
    const fs::path path = temp_file("ldahash_bad.csv");
    {
        std::ofstream out(path);
        out << "label,f0,f1\n0,1.0,2.0\n1,3.0\n";
    }
    CHECK_THROWS_WITH_AS(load_csv_features(path.string()),
                         doctest::Contains("line 3"), ParseError);
    {
        std::ofstream out(path, std::ios::trunc);
        out << "label,f0\n0,abc\n";
    }
    CHECK_THROWS_WITH_AS(load_csv_features(path.string()),
                         doctest::Contains("line 2"), ParseError);
    {
        std::ofstream out(path, std::ios::trunc);
    }
    CHECK_THROWS_AS(load_csv_features(path.string()), ParseError);
    {
        std::ofstream out(path, std::ios::trunc);
        out << "f0,label\n";
    }
    CHECK_THROWS_AS(load_csv_features(path.string()), ParseError);
    fs::remove(path);
}

TEST_CASE("idx loader") {
    const fs::path images_path = temp_file("ldahash_images.idx");
    const fs::path labels_path = temp_file("ldahash_labels.idx");

    // Hand-built 2x2 image with pixels (0,255,128,64).
    write_idx_pair(images_path, labels_path, {{0, 255, 128, 64}}, {3}, 2, 2);
    const LabeledDataset tiny = load_idx(images_path.string(), labels_path.string());
    CHECK(tiny.dim() == 4);
    CHECK(tiny.features(0, 0) == doctest::Approx(0.0));
    CHECK(tiny.features(1, 0) == doctest::Approx(1.0));
    CHECK(tiny.features(2, 0) == doctest::Approx(128.0 / 255.0));
    CHECK(tiny.features(3, 0) == doctest::Approx(64.0 / 255.0));
    CHECK(tiny.labels[0] == 3);

    // All-zero single image.
    write_idx_pair(images_path, labels_path, {std::vector<unsigned char>(4, 0)}, {0}, 2, 2);
    const LabeledDataset zeros = load_idx(images_path.string(), labels_path.string());
    CHECK(max_abs(zeros.features) == 0.0);

    // Wrong magic.
    write_idx_pair(images_path, labels_path, {{1, 2, 3, 4}}, {0}, 2, 2, 0x00000777u);
    CHECK_THROWS_WITH_AS(load_idx(images_path.string(), labels_path.string()),
                         doctest::Contains("magic"), ParseError);

    // Count mismatch.
    write_idx_pair(images_path, labels_path, {{1, 2, 3, 4}}, {0, 1}, 2, 2);
    CHECK_THROWS_WITH_AS(load_idx(images_path.string(), labels_path.string()),
                         doctest::Contains("count"), ParseError);

    // Truncated payload.
    {
        std::ofstream out(images_path, std::ios::binary | std::ios::trunc);
        write_be32(out, 0x00000803u);
        write_be32(out, 2);
        write_be32(out, 2);
        write_be32(out, 2);
        const unsigned char few[3] = {1, 2, 3};
        out.write(reinterpret_cast<const char*>(few), 3);
        std::ofstream labels_out(labels_path, std::ios::binary | std::ios::trunc);
        write_be32(labels_out, 0x00000801u);
        write_be32(labels_out, 2);
        const unsigned char two[2] = {0, 1};
        labels_out.write(reinterpret_cast<const char*>(two), 2);
    }
    CHECK_THROWS_WITH_AS(load_idx(images_path.string(), labels_path.string()),
                         doctest::Contains("truncated"), ParseError);

    fs::remove(images_path);
    fs::remove(labels_path);
}

TEST_CASE("idx round trip through the test writer") {
    Rng rng(61);
    std::vector<std::vector<unsigned char>> images;
    std::vector<unsigned char> labels;
    for (int i = 0; i < 7; ++i) {
        std::vector<unsigned char> image(6);
        for (auto& pixel : image) pixel = static_cast<unsigned char>(rng.bounded(256));
        images.push_back(std::move(image));
        labels.push_back(static_cast<unsigned char>(rng.bounded(5)));
    }
    const fs::path images_path = temp_file("ldahash_rt_images.idx");
    const fs::path labels_path = temp_file("ldahash_rt_labels.idx");
    write_idx_pair(images_path, labels_path, images, labels, 2, 3);
    const LabeledDataset loaded = load_idx(images_path.string(), labels_path.string());
    REQUIRE(loaded.item_count() == images.size());
    for (std::size_t i = 0; i < images.size(); ++i) {
        CHECK(loaded.labels[i] == labels[i]);
        for (std::size_t j = 0; j < 6; ++j) {
            // Exact byte recovery before scaling.
            CHECK(std::llround(loaded.features(j, i) * 255.0) == images[i][j]);
        }
    }
    fs::remove(images_path);
    fs::remove(labels_path);
}

TEST_CASE("split protocol laws") {
    Rng rng(62);
    for (int round = 0; round < 10; ++round) {
        const LabeledDataset data = test_support::random_dataset(rng, 5, 4, 20);
        const std::vector<std::size_t> sizes = data.class_sizes();
        const std::size_t smallest = *std::min_element(sizes.begin(), sizes.end());
        if (smallest < 3) continue;
        SplitSpec spec;
        spec.queries_per_class = 1 + static_cast<int>(rng.bounded(smallest / 3 + 1));
        spec.train_per_class =
            1 + static_cast<int>(rng.bounded(smallest - spec.queries_per_class));
        spec.seed = rng.next_u64();
        const SplitResult split = split_protocol(data, spec);

        const std::set<std::int64_t> query_set(split.query_ids.begin(),
                                               split.query_ids.end());
        const std::set<std::int64_t> gallery_set(split.gallery_ids.begin(),
                                                 split.gallery_ids.end());
        // Disjoint query/gallery.
        for (std::int64_t id : query_set) CHECK(gallery_set.count(id) == 0);
        // Train inside gallery.
        for (std::int64_t id : split.train_ids) CHECK(gallery_set.count(id) == 1);
        // Gallery = source minus queries.
        CHECK(gallery_set.size() + query_set.size() == data.item_count());

        // Exact counts.
        CHECK(split.query_ids.size() ==
              static_cast<std::size_t>(spec.queries_per_class) * sizes.size());
        CHECK(split.train_ids.size() ==
              static_cast<std::size_t>(spec.train_per_class) * sizes.size());

        // Features survive the gather.
        for (std::size_t k = 0; k < split.query_ids.size(); ++k) {
            const auto src = static_cast<std::size_t>(split.query_ids[k]);
            CHECK(split.query.labels[k] == data.labels[src]);
            CHECK(split.query.features(0, k) == data.features(0, src));
        }

        // Same seed, same split.
        const SplitResult again = split_protocol(data, spec);
        CHECK(again.query_ids == split.query_ids);
        CHECK(again.train_ids == split.train_ids);
    }
}

TEST_CASE("split protocol capacity error names the class") {
    LabeledDataset data;
    data.class_count = 2;
    data.features = Matrix::from_rows({{1, 2, 3, 4, 5}, {0, 0, 0, 0, 0}});
    data.labels = {0, 0, 0, 1, 1};
    SplitSpec spec;
    spec.queries_per_class = 1;
    spec.train_per_class = 2;  // class 1 has only 2 items, needs 3
    spec.seed = 1;
    CHECK_THROWS_WITH_AS(split_protocol(data, spec), doctest::Contains("class 1"),
                         ValidationError);
}

TEST_CASE("split manifest file") {
    LabeledDataset data;
    data.class_count = 2;
    data.features = Matrix::from_rows({{1, 2, 3, 4}, {0, 0, 0, 0}});
    data.labels = {0, 0, 1, 1};
    SplitSpec spec{1, 1, 3};
    const SplitResult split = split_protocol(data, spec);
    const fs::path path = temp_file("ldahash_split.csv");
    write_split_manifest(split, path.string());
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "source_id,role");
    std::size_t rows = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) ++rows;
    }
    CHECK(rows == split.query_ids.size() + split.gallery_ids.size() + split.train_ids.size());
    fs::remove(path);
}

TEST_CASE("concat_datasets") {
    LabeledDataset a;
    a.class_count = 2;
    a.features = Matrix::from_rows({{1, 2}, {3, 4}});
    a.labels = {0, 1};
    LabeledDataset b;
    b.class_count = 2;
    b.features = Matrix::from_rows({{5}, {6}});
    b.labels = {1};
    const LabeledDataset joined = concat_datasets(a, b);
    CHECK(joined.item_count() == 3);
    CHECK(joined.features(0, 2) == 5.0);
    CHECK(joined.labels == std::vector<int>{0, 1, 1});
    CHECK_THROWS_AS(concat_datasets(a, LabeledDataset{Matrix(3, 1), {0}, 1}), DimensionError);
}
