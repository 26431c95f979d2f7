#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "ldahash/data.hpp"
#include "ldahash/errors.hpp"
#include "ldahash/serialize.hpp"

using namespace ldahash;

namespace {

namespace fs = std::filesystem;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("ldah model round trip") {
    Rng rng(101);
    const LabeledDataset data = test_support::random_dataset(rng, 5, 3, 10);
    const LinearHashModel model = fit_ldah(data, 3, kDefaultMu);
    const fs::path path = fs::temp_directory_path() / "ldahash_model_ldah.json";
    save_model(model, path.string());
    const AnyModel loaded = load_model(path.string());
    REQUIRE(std::holds_alternative<LinearHashModel>(loaded));
    const auto& back = std::get<LinearHashModel>(loaded);
    CHECK(test_support::bitwise_equal(back.projection, model.projection));
    CHECK(back.thresholds == model.thresholds);
    CHECK(back.eigenvalues == model.eigenvalues);
    CHECK(back.mu == model.mu);
    CHECK(back.code_bits == model.code_bits);

    // Encoding through the variant matches the direct path.
    std::vector<std::int64_t> ids(data.item_count());
    std::iota(ids.begin(), ids.end(), std::int64_t{0});
    const BinaryCodes direct = encode_linear(model, data.features);
    const BinaryCodes via_variant = encode_with_model(loaded, data.features, std::move(ids));
    CHECK(direct.words == via_variant.words);
    fs::remove(path);
}

TEST_CASE("dldah model round trip preserves bits") {
    const LabeledDataset data = gen_gaussian_clusters(19, 3, 10, 6, 8.0);
    NetworkConfig config;
    config.input_dim = 6;
    config.hidden_dims = {5};
    config.code_bits = 4;
    config.batch_size = 8;
    config.epochs = 2;
    config.seed = 77;
    auto [model, history] = train(data, config);
    (void)history;
    const fs::path path = fs::temp_directory_path() / "ldahash_model_dldah.json";
    save_model(model, path.string());
    const AnyModel loaded = load_model(path.string());
    REQUIRE(std::holds_alternative<DeepHashModel>(loaded));
    const auto& back = std::get<DeepHashModel>(loaded);
    REQUIRE(back.layers.size() == model.layers.size());
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        CHECK(test_support::bitwise_equal(back.layers[l].weights, model.layers[l].weights));
        CHECK(back.layers[l].bias == model.layers[l].bias);
    }
    CHECK(back.alpha == model.alpha);
    CHECK(test_support::bitwise_equal(back.regression_weights, model.regression_weights));
    CHECK(back.regression_bias == model.regression_bias);
    CHECK(back.config.seed == config.seed);
    CHECK(back.class_count == model.class_count);

    const BinaryCodes a = encode_deep(model, data.features);
    const BinaryCodes b = encode_deep(back, data.features);
    CHECK(a.words == b.words);

    // Serialization is byte-deterministic.
    const fs::path path2 = fs::temp_directory_path() / "ldahash_model_dldah2.json";
    save_model(back, path2.string());
    CHECK(slurp(path.string()) == slurp(path2.string()));
    fs::remove(path);
    fs::remove(path2);
}

TEST_CASE("lsh model round trip") {
    const LshModel model = fit_lsh(7, 5, 123);
    const fs::path path = fs::temp_directory_path() / "ldahash_model_lsh.json";
    save_model(model, path.string());
    const AnyModel loaded = load_model(path.string());
    REQUIRE(std::holds_alternative<LshModel>(loaded));
    CHECK(test_support::bitwise_equal(std::get<LshModel>(loaded).projection, model.projection));
    CHECK(model_input_dim(loaded) == 7);
    CHECK(model_code_bits(loaded) == 5);
    CHECK(std::string(model_type_name(loaded)) == "lsh");
    fs::remove(path);
}

TEST_CASE("model file errors") {
    const fs::path path = fs::temp_directory_path() / "ldahash_model_bad.json";
    CHECK_THROWS_AS(load_model((path.string() + ".missing")), ParseError);
    {
        std::ofstream out(path);
        out << "{not json";
    }
    CHECK_THROWS_AS(load_model(path.string()), ParseError);
    {
        std::ofstream out(path, std::ios::trunc);
        out << R"({"format_version":1,"model_type":"bogus"})";
    }
    CHECK_THROWS_AS(load_model(path.string()), ParseError);
    {
        std::ofstream out(path, std::ios::trunc);
        out << R"({"format_version":99,"model_type":"lsh"})";
    }
    CHECK_THROWS_AS(load_model(path.string()), ParseError);
    fs::remove(path);
}
