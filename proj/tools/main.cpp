#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ldahash/cli.hpp"
#include "ldahash/errors.hpp"

namespace {

std::vector<int> parse_bits(const std::string& text) {
    std::vector<int> bits;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = text.find(',', start);
        const std::string piece =
            text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        if (piece.empty()) throw ldahash::ValidationError("--bits: empty entry");
        try {
            const int value = std::stoi(piece);
            if (value < 1) throw ldahash::ValidationError("--bits: widths must be >= 1");
            bits.push_back(value);
        } catch (const std::invalid_argument&) {
            throw ldahash::ValidationError("--bits: non-numeric entry '" + piece + "'");
        } catch (const std::out_of_range&) {
            throw ldahash::ValidationError("--bits: entry out of range '" + piece + "'");
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return bits;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"learning-to-hash toolkit: discriminant and deep hash codes with "
                 "Hamming retrieval and evaluation"};
    app.require_subcommand(1);

    std::string config_path;
    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    synth->add_option("--config", config_path, "experiment config (JSON)")->required();

    std::string train_config;
    auto* train_cmd = app.add_subcommand("train", "fit a hash model on the train split");
    train_cmd->add_option("--config", train_config, "experiment config (JSON)")->required();

    std::string model_path, data_path, encode_out;
    auto* encode = app.add_subcommand("encode", "encode a dataset into binary codes");
    encode->add_option("--model", model_path, "model file")->required();
    encode->add_option("--data", data_path,
                       "dataset: features.csv or images_idx,labels_idx")->required();
    encode->add_option("--out", encode_out, "output codes file")->required();

    std::string gallery_path, queries_path, labels_path, eval_out;
    int radius = 2;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate query codes against a gallery");
    eval_cmd->add_option("--gallery", gallery_path, "gallery codes file")->required();
    eval_cmd->add_option("--queries", queries_path, "query codes file")->required();
    eval_cmd->add_option("--labels", labels_path, "labels CSV (role,item_id,label)")
        ->required();
    eval_cmd->add_option("--radius", radius, "Hamming ball radius (default 2)");
    eval_cmd->add_option("--out", eval_out, "output directory")->required();

    std::uint64_t verify_seed = 1;
    int verify_trials = 100;
    bool corrupt_between = false;
    auto* verify = app.add_subcommand("verify", "check the algebraic identities");
    verify->add_option("--seed", verify_seed, "random seed");
    verify->add_option("--trials", verify_trials, "number of random instances");
    verify->add_flag("--corrupt-between", corrupt_between,
                     "negative control: perturb one scatter entry")
        ->group("");  // test hook, hidden from help

    std::string bench_config, bits_text = "8,16,32,64";
    auto* bench = app.add_subcommand("bench", "train+encode+eval across bit widths");
    bench->add_option("--config", bench_config, "experiment config (JSON)")->required();
    bench->add_option("--bits", bits_text, "comma-separated code widths");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return ldahash::cli::run_synth(config_path);
        if (train_cmd->parsed()) return ldahash::cli::run_train(train_config);
        if (encode->parsed()) {
            return ldahash::cli::run_encode(model_path, data_path, encode_out);
        }
        if (eval_cmd->parsed()) {
            return ldahash::cli::run_eval(gallery_path, queries_path, labels_path, radius,
                                          eval_out);
        }
        if (verify->parsed()) {
            return ldahash::cli::run_verify(verify_seed, verify_trials, corrupt_between);
        }
        if (bench->parsed()) {
            return ldahash::cli::run_bench(bench_config, parse_bits(bits_text));
        }
    } catch (const ldahash::NumericError& err) {
        std::cerr << "numeric failure: " << err.what() << "\n";
        return 2;
    } catch (const ldahash::ValidationError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 0;
}
