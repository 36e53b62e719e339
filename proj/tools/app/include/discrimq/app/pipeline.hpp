#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "discrimq/app/config.hpp"
#include "discrimq/attributes/attribute_vocab.hpp"
#include "discrimq/corpus/region.hpp"
#include "discrimq/corpus/splits.hpp"
#include "discrimq/corpus/synth.hpp"
#include "discrimq/corpus/vocabulary.hpp"
#include "discrimq/metrics/bleu.hpp"

namespace discrimq::app {

using Status = nlohmann::json;

corpus::SynthConfig synth_config(RunConfig const& config);

/// Corpus plus the artifacts of the ingest stage.
struct Workspace {
    corpus::CorpusStore store;
    corpus::Vocabulary vocab;
    attributes::AttributeVocab attrs;
    corpus::SplitAssignment splits;
    /// pair_id -> val or test.
    std::map<std::string, corpus::Split> pair_split;

    [[nodiscard]] std::vector<corpus::RegionRecord const*> regions(corpus::Split split) const;
    [[nodiscard]] std::vector<corpus::EvalPair const*> pairs(corpus::Split split) const;
};

Workspace load_workspace(RunConfig const& config);

Status stage_synth(RunConfig const& config);
Status stage_ingest(RunConfig const& config);
Status stage_train_attr(RunConfig const& config);
Status stage_train_vqa(RunConfig const& config);
Status stage_train_qgen(RunConfig const& config);
Status stage_train_baseline(RunConfig const& config);
Status stage_select(RunConfig const& config);
Status stage_generate(RunConfig const& config);
Status stage_evaluate(RunConfig const& config);
Status stage_gradcheck(RunConfig const& config);
Status stage_report(RunConfig const& config);

/// synth (synthetic profile only), ingest, the four trainings, select,
/// generate, evaluate and report. Returns each stage's status in order.
std::vector<Status> run_pipeline(RunConfig const& config);

struct GeneratedRecord {
    std::string pair_id;
    std::string question;
    nlohmann::json raw;
};

std::vector<GeneratedRecord> read_generated(std::filesystem::path const& path);

/// Per object category, the ceil(n/2) pairs with the lowest share of
/// positive references (ties by pair order).
std::vector<std::string> hard_subset(corpus::CorpusStore const& store, std::vector<std::string> const& pair_ids);

struct MethodScores {
    std::string method;
    std::size_t n = 0;
    metrics::CorpusScore delta_bleu;
    metrics::CorpusScore bleu;
    bool hard = false;
};

/// Scores the generated questions for `pair_ids` against their rated
/// references.
MethodScores score_generated(corpus::CorpusStore const& store, std::vector<GeneratedRecord> const& generated,
                             std::vector<std::string> const& pair_ids, std::string const& method);

nlohmann::json scores_to_json(MethodScores const& s);

/// Methods x metrics table (report.csv) plus a text summary (report.txt);
/// rows follow the fixed method order. Each entry is a scores.json object.
void emit_report(std::filesystem::path const& out_dir, std::vector<nlohmann::json> const& scores,
                 std::string const& stem = "report");

}  // namespace discrimq::app
