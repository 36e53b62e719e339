#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "discrimq/corpus/ingest.hpp"
#include "discrimq/nn/train.hpp"

namespace discrimq::app {

struct Schedule {
    std::size_t epochs = 30;
    std::size_t batch = 50;
    double lr = 1e-3;
    double clip = 5.0;

    [[nodiscard]] nn::TrainSchedule to_train() const;
    friend bool operator==(Schedule const&, Schedule const&) = default;
};

/// Every setting of a run. The on-disk form is a JSON object tree whose keys
/// mirror these members (see to_json).
struct RunConfig {
    corpus::Profile profile = corpus::Profile::synthetic;
    std::uint64_t seed = 7;

    struct Paths {
        /// Directory with regions.jsonl / pairs.jsonl; empty means <out>/corpus.
        std::string corpus;
        std::string out = "discrimq_out";
        /// Optional word-vector file for frozen attribute embeddings.
        std::string embeddings;
        friend bool operator==(Paths const&, Paths const&) = default;
    } paths;

    struct Synth {
        std::size_t images = 400;
        std::size_t pairs = 200;
        std::size_t max_regions = 3;
        double noise = 0.05;
        double reference_keep = 0.8;
        friend bool operator==(Synth const&, Synth const&) = default;
    } synth;

    struct Data {
        bool strict_schema = true;
        std::size_t min_freq = 1;
        std::size_t max_len = 15;
        double train = 0.70;
        double val = 0.15;
        double test = 0.15;
        /// Share of evaluation pairs held back for tuning alpha and beta.
        double pair_validation = 0.3;
        friend bool operator==(Data const&, Data const&) = default;
    } data;

    struct Attributes {
        std::size_t k = 612;
        std::size_t answer_top_n = 1000;
        std::size_t hidden = 64;
        bool cosine = false;
        Schedule schedule{50, 50, 1e-3, 5.0};
        friend bool operator==(Attributes const&, Attributes const&) = default;
    } attributes;

    struct Vqa {
        std::size_t embed = 32;
        std::size_t hidden = 32;
        Schedule schedule{30, 50, 1e-3, 5.0};
        friend bool operator==(Vqa const&, Vqa const&) = default;
    } vqa;

    struct QGen {
        std::size_t embed = 32;
        std::size_t hidden = 32;
        std::size_t layers = 2;
        std::size_t att_dim = 64;
        Schedule schedule{30, 50, 1e-3, 5.0};
        friend bool operator==(QGen const&, QGen const&) = default;
    } qgen;

    struct Selector {
        double alpha = 1.0;
        double beta = 1.0;
        std::size_t top_k = 5;
        std::string mode = "exact";
        bool tune = true;
        std::vector<double> grid{0.25, 0.5, 1.0, 2.0};
        friend bool operator==(Selector const&, Selector const&) = default;
    } selector;

    struct Beam {
        std::size_t width = 5;
        std::size_t max_len = 15;
        friend bool operator==(Beam const&, Beam const&) = default;
    } beam;

    std::size_t retrieval_k = 100;
    /// One method name or "all".
    std::string method = "all";
    bool hard = false;

    [[nodiscard]] std::filesystem::path out_dir() const { return paths.out; }
    [[nodiscard]] std::filesystem::path corpus_dir() const;

    /// Throws ConfigError for inconsistent values.
    void validate() const;

    friend bool operator==(RunConfig const&, RunConfig const&) = default;
};

RunConfig default_config(corpus::Profile profile);

nlohmann::json to_json(RunConfig const& config);
/// Strict: every key of the profile defaults must be present and no other.
RunConfig from_json(nlohmann::json const& tree);

/// Dotted-path overrides such as {"selector.alpha": "0"}. Values are parsed
/// as JSON when possible and taken as strings otherwise.
using Overrides = std::map<std::string, std::string>;

/// Profile defaults, then the file (when `path` is non-empty), then the
/// DISCRIMQ_OUT environment variable, then `overrides`. Unknown keys raise
/// ConfigError naming them; a missing file raises ConfigError with its path.
RunConfig load_config(std::filesystem::path const& path, Overrides const& overrides);

/// Writes <out>/config.<stage>.json.
void echo_config(RunConfig const& config, std::string const& stage);

}  // namespace discrimq::app
