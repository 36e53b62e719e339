#include "discrimq/app/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "discrimq/app/gradcheck_suite.hpp"
#include "discrimq/attributes/attr_model.hpp"
#include "discrimq/corpus/ingest.hpp"
#include "discrimq/corpus/tokenizer.hpp"
#include "discrimq/errors.hpp"
#include "discrimq/qgen/generator.hpp"
#include "discrimq/qgen/retrieval.hpp"
#include "discrimq/vqa/vqa_model.hpp"

namespace discrimq::app {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr char const* kSelectorFile = "selector.json";

void require_file(fs::path const& path, std::string_view stage) {
    if (!fs::exists(path)) {
        throw InputError("missing " + path.string() + " (run " + std::string(stage) + " first)");
    }
}

json read_json_file(fs::path const& path, std::string_view stage) {
    require_file(path, stage);
    std::ifstream in(path);
    try {
        return json::parse(in);
    } catch (json::exception const& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void write_text(fs::path const& path, std::string const& text) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << text;
}

void write_json_file(fs::path const& path, json const& j) { write_text(path, j.dump(2) + "\n"); }

void write_matrix(fs::path const& path, SimilarityMatrix const& m) {
    std::ostringstream out;
    m.write_csv(out);
    write_text(path, out.str());
}

SimilarityMatrix read_matrix(fs::path const& path, std::string_view stage) {
    require_file(path, stage);
    std::ifstream in(path);
    return SimilarityMatrix::read_csv(in);
}

corpus::IngestOptions ingest_options(RunConfig const& config) {
    return {corpus::default_feature_dim(config.profile), config.data.strict_schema};
}

pairselect::SelectorConfig base_selector(RunConfig const& config) {
    pairselect::SelectorConfig s;
    s.alpha = config.selector.alpha;
    s.beta = config.selector.beta;
    s.top_k = config.selector.top_k;
    s.mode = pairselect::parse_mode(config.selector.mode);
    s.validate();
    return s;
}

qgen::BeamConfig beam_config(RunConfig const& config) {
    qgen::BeamConfig b{config.beam.width, config.beam.max_len};
    b.validate();
    return b;
}

json optional_index(std::optional<std::size_t> k) { return k ? json(*k) : json(nullptr); }

json attribute_name(attributes::AttributeVocab const& attrs, std::optional<std::size_t> k) {
    return k ? json(attrs.expression(*k)) : json(nullptr);
}

std::vector<qgen::Method> selected_methods(RunConfig const& config) {
    if (config.method == "all") {
        return {qgen::kAllMethods.begin(), qgen::kAllMethods.end()};
    }
    return {qgen::parse_method(config.method)};
}

std::vector<metrics::WeightedReference> weighted_references(corpus::EvalPair const& pair) {
    std::vector<metrics::WeightedReference> refs;
    for (auto const& r : pair.references) {
        refs.push_back({corpus::tokenize(r.text), corpus::rating_weight(r.rating)});
    }
    return refs;
}

/// Positive references, or every reference when none is positive.
std::vector<metrics::Tokens> plain_references(corpus::EvalPair const& pair) {
    std::vector<metrics::Tokens> positive;
    std::vector<metrics::Tokens> all;
    for (auto const& r : pair.references) {
        auto tokens = corpus::tokenize(r.text);
        if (r.rating != corpus::Rating::neg) {
            positive.push_back(tokens);
        }
        all.push_back(std::move(tokens));
    }
    return positive.empty() ? all : positive;
}

struct LoadedModels {
    attributes::AttrModel<float> attr;
    SimilarityMatrix q_sim;
    SimilarityMatrix v_sim;
    qgen::QGenModel<float> qgen;
};

LoadedModels load_discriminative(RunConfig const& config) {
    fs::path const out = config.out_dir();
    require_file(out / "attr.ckpt", "train-attr");
    require_file(out / "qgen.ckpt", "train-qgen");
    return {attributes::load_attr_model(out / "attr.ckpt"), read_matrix(out / "q_sim.csv", "train-vqa"),
            read_matrix(out / "v_sim.csv", "train-attr"), qgen::load_qgen_model(out / "qgen.ckpt")};
}

json question_record(std::string const& pair_id, qgen::GeneratedQuestion const& q,
                     attributes::AttributeVocab const& attrs) {
    return {{"pair_id", pair_id},
            {"question", corpus::join_tokens(q.words)},
            {"log_prob", q.log_prob},
            {"length_normalized_log_prob", q.normalized_log_prob},
            {"att_i", attribute_name(attrs, q.att_i)},
            {"att_j", attribute_name(attrs, q.att_j)},
            {"i", optional_index(q.att_i)},
            {"j", optional_index(q.att_j)},
            {"pair_score", q.pair_score},
            {"final_score", q.final_score},
            {"low_confidence", q.low_confidence},
            {"method", qgen::method_name(q.method)}};
}

std::string format_percent(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", 100.0 * x);
    return buf;
}

std::string csv_field(std::string const& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    return out + "\"";
}

}  // namespace

corpus::SynthConfig synth_config(RunConfig const& config) {
    auto sc = corpus::SynthConfig::defaults();
    sc.num_images = config.synth.images;
    sc.num_pairs = config.synth.pairs;
    sc.max_regions_per_image = config.synth.max_regions;
    sc.noise_sigma = config.synth.noise;
    sc.reference_keep = config.synth.reference_keep;
    return sc;
}

std::vector<corpus::RegionRecord const*> Workspace::regions(corpus::Split split) const {
    std::vector<corpus::RegionRecord const*> out;
    for (auto const& r : store.regions()) {
        if (splits.contains(r.image_id) && splits.of_image(r.image_id) == split) {
            out.push_back(&r);
        }
    }
    return out;
}

std::vector<corpus::EvalPair const*> Workspace::pairs(corpus::Split split) const {
    std::vector<corpus::EvalPair const*> out;
    for (auto const& p : store.pairs()) {
        auto it = pair_split.find(p.pair_id);
        if (it != pair_split.end() && it->second == split) {
            out.push_back(&p);
        }
    }
    return out;
}

Workspace load_workspace(RunConfig const& config) {
    fs::path const out = config.out_dir();
    fs::path const dir = config.corpus_dir();
    require_file(dir / "regions.jsonl", "synth or supply a corpus");
    Workspace ws;
    ws.store = corpus::ingest_corpus(dir, ingest_options(config)).store;
    ws.vocab = corpus::Vocabulary::from_json(read_json_file(out / "vocab.json", "ingest"));
    ws.attrs = attributes::AttributeVocab::from_json(read_json_file(out / "attribute_vocab.json", "ingest"));
    json const splits = read_json_file(out / "splits.json", "ingest");
    ws.splits = corpus::SplitAssignment::from_json(splits.at("images"));
    for (auto const& [id, name] : splits.at("pairs").items()) {
        ws.pair_split[id] = name.get<std::string>() == "val" ? corpus::Split::val : corpus::Split::test;
    }
    return ws;
}

Status stage_synth(RunConfig const& config) {
    if (config.profile != corpus::Profile::synthetic) {
        throw ConfigError("synth requires the synthetic profile");
    }
    auto const sc = synth_config(config);
    auto const world = corpus::synth_microworld(sc, config.seed);
    fs::path const dir = config.corpus_dir();
    corpus::dump_corpus(dir, world.store);
    std::ostringstream truth;
    corpus::dump_truth(truth, sc, world.truth);
    write_text(dir / "ground_truth.jsonl", truth.str());
    return {{"regions", world.store.regions().size()},
            {"pairs", world.store.pairs().size()},
            {"feature_dim", sc.feature_dim()},
            {"corpus", dir.string()}};
}

Status stage_ingest(RunConfig const& config) {
    fs::path const dir = config.corpus_dir();
    require_file(dir / "regions.jsonl", "synth or supply a corpus");
    auto result = corpus::ingest_corpus(dir, ingest_options(config));
    auto const& store = result.store;

    std::set<std::string> pair_images;
    for (auto const& p : store.pairs()) {
        pair_images.insert(store.region(p.region_a).image_id);
        pair_images.insert(store.region(p.region_b).image_id);
    }
    std::vector<std::string> images;
    for (auto const& id : store.image_ids()) {
        if (!pair_images.contains(id)) {
            images.push_back(id);
        }
    }
    corpus::SplitRatios const ratios{config.data.train, config.data.val, config.data.test};
    auto const splits = corpus::make_splits(images, ratios, config.seed);

    std::vector<std::string> pair_ids;
    for (auto const& p : store.pairs()) {
        pair_ids.push_back(p.pair_id);
    }
    double const v = config.data.pair_validation;
    auto const pair_assign = corpus::make_splits(pair_ids, {0.0, v, 1.0 - v}, config.seed + 1);

    std::vector<corpus::RegionRecord const*> train;
    for (auto const& r : store.regions()) {
        if (splits.contains(r.image_id) && splits.of_image(r.image_id) == corpus::Split::train) {
            train.push_back(&r);
        }
    }
    std::vector<std::vector<std::string>> questions;
    for (auto const* r : train) {
        for (auto const& qa : r->questions) {
            auto tokens = corpus::tokenize(qa.text);
            if (tokens.size() > config.data.max_len) {
                tokens.resize(config.data.max_len);
            }
            questions.push_back(std::move(tokens));
        }
    }
    auto const vocab = corpus::Vocabulary::build(questions, config.data.min_freq);
    auto const attr_corpus = attributes::collect_attribute_corpus(train);
    auto const rules = attributes::default_pos_rules();
    auto const extraction = attributes::extract_attribute_vocab(attr_corpus.texts, attr_corpus.answers, rules,
                                                                config.attributes.k, config.attributes.answer_top_n);

    fs::path const out = config.out_dir();
    write_json_file(out / "vocab.json", vocab.to_json());
    json attr_json = extraction.vocab.to_json();
    for (std::size_t k = 0; k < attr_json.size(); ++k) {
        attr_json[k]["frequency"] = extraction.frequencies[k];
    }
    write_json_file(out / "attribute_vocab.json", attr_json);
    json pairs_json = json::object();
    for (auto const& [id, split] : pair_assign.by_image) {
        pairs_json[id] = corpus::split_name(split);
    }
    write_json_file(out / "splits.json", {{"images", splits.to_json()}, {"pairs", pairs_json}});

    auto const& rep = result.report;
    Status status{{"regions_accepted", rep.regions_accepted},
                  {"regions_rejected", rep.regions_rejected},
                  {"pairs_accepted", rep.pairs_accepted},
                  {"pairs_rejected", rep.pairs_rejected},
                  {"vocab_size", vocab.size()},
                  {"attributes", extraction.vocab.size()},
                  {"attribute_candidates", extraction.candidates},
                  {"attribute_shortfall", extraction.shortfall},
                  {"split_sizes", splits.sizes},
                  {"pair_split_sizes", {pair_assign.sizes[1], pair_assign.sizes[2]}}};
    json report = status;
    report["messages"] = rep.messages;
    write_json_file(out / "ingest_report.json", report);
    return status;
}

Status stage_train_attr(RunConfig const& config) {
    auto const ws = load_workspace(config);
    auto const train = ws.regions(corpus::Split::train);
    auto const samples = attributes::make_attr_samples(train, ws.attrs);
    attributes::AttrHyper hyper;
    hyper.hidden = config.attributes.hidden;
    hyper.schedule = config.attributes.schedule.to_train();
    hyper.seed = config.seed + 11;
    std::size_t const input_dim = corpus::representation_dim(corpus::default_feature_dim(config.profile));
    std::vector<double> losses;
    auto const model = attributes::train_attr_model(samples, input_dim, ws.attrs.size(), hyper, &losses);

    fs::path const out = config.out_dir();
    attributes::save_attr_model(out / "attr.ckpt", model);
    write_matrix(out / "v_sim.csv", attributes::visual_similarity_matrix(model, config.attributes.cosine));

    Status status{{"train_samples", samples.size()}, {"final_loss", losses.empty() ? 0.0 : losses.back()}};
    auto const test = ws.regions(corpus::Split::test);
    if (!test.empty()) {
        std::vector<std::vector<float>> scores;
        std::vector<std::vector<float>> labels;
        for (auto const* r : test) {
            scores.push_back(attributes::predict_attributes(model, *r));
            labels.push_back(attributes::label_region(*r, ws.attrs));
        }
        status["test_map"] = attributes::mean_average_precision(scores, labels);
    }
    return status;
}

Status stage_train_vqa(RunConfig const& config) {
    auto const ws = load_workspace(config);
    auto const data = vqa::make_vqa_samples(ws.regions(corpus::Split::train), ws.vocab, ws.attrs, config.data.max_len);
    vqa::VqaHyper hyper;
    hyper.embed = config.vqa.embed;
    hyper.hidden = config.vqa.hidden;
    hyper.schedule = config.vqa.schedule.to_train();
    hyper.seed = config.seed + 12;
    std::size_t const input_dim = corpus::representation_dim(corpus::default_feature_dim(config.profile));
    std::vector<double> losses;
    auto const model = vqa::train_vqa(data.samples, ws.vocab.size(), input_dim, ws.attrs.size(), hyper, &losses);

    fs::path const out = config.out_dir();
    vqa::save_vqa_model(out / "vqa.ckpt", model);
    write_matrix(out / "q_sim.csv", vqa::question_similarity_matrix(model, config.attributes.cosine));

    Status status{{"train_samples", data.samples.size()},
                  {"dropped", data.dropped},
                  {"final_loss", losses.empty() ? 0.0 : losses.back()}};
    auto const test = vqa::make_vqa_samples(ws.regions(corpus::Split::test), ws.vocab, ws.attrs, config.data.max_len);
    if (!test.samples.empty()) {
        status["test_accuracy"] = vqa::answer_accuracy(model, test.samples);
    }
    return status;
}

namespace {

Status train_generator(RunConfig const& config, qgen::QGenMode mode, fs::path const& file, std::uint64_t seed) {
    auto const ws = load_workspace(config);
    auto const data =
        qgen::make_qgen_samples(ws.regions(corpus::Split::train), ws.vocab, ws.attrs, mode, config.data.max_len);
    qgen::QGenHyper hyper;
    hyper.embed = config.qgen.embed;
    hyper.hidden = config.qgen.hidden;
    hyper.layers = config.qgen.layers;
    hyper.att_dim = config.qgen.att_dim;
    hyper.schedule = config.qgen.schedule.to_train();
    hyper.seed = seed;
    std::optional<nn::Tensor<float>> pretrained;
    if (mode == qgen::QGenMode::conditioned && !config.paths.embeddings.empty()) {
        require_file(config.paths.embeddings, "supplying paths.embeddings");
        pretrained = qgen::load_attribute_embeddings(config.paths.embeddings, ws.attrs);
    }
    std::size_t const input_dim = corpus::representation_dim(corpus::default_feature_dim(config.profile));
    std::vector<double> losses;
    auto const model =
        qgen::train_qgen(data.samples, mode, ws.vocab.size(), input_dim, ws.attrs.size(), hyper, pretrained, &losses);
    qgen::save_qgen_model(config.out_dir() / file, model);

    Status status{{"train_samples", data.samples.size()},
                  {"dropped", data.dropped},
                  {"final_loss", losses.empty() ? 0.0 : losses.back()}};
    auto const test =
        qgen::make_qgen_samples(ws.regions(corpus::Split::test), ws.vocab, ws.attrs, mode, config.data.max_len);
    if (!test.samples.empty()) {
        status["test_perplexity"] = qgen::perplexity(model, test.samples);
    }
    return status;
}

}  // namespace

Status stage_train_qgen(RunConfig const& config) {
    return train_generator(config, qgen::QGenMode::conditioned, "qgen.ckpt", config.seed + 13);
}

Status stage_train_baseline(RunConfig const& config) {
    return train_generator(config, qgen::QGenMode::baseline, "baseline.ckpt", config.seed + 14);
}

Status stage_select(RunConfig const& config) {
    auto const ws = load_workspace(config);
    fs::path const out = config.out_dir();
    auto selector = base_selector(config);
    auto const beam = beam_config(config);

    json selector_json{{"tuned", false}};
    auto const val_pairs = ws.pairs(corpus::Split::val);
    bool const tune = config.selector.tune && !val_pairs.empty();
    if (tune) {
        auto const models = load_discriminative(config);
        qgen::DiscriminativeModels const dm{models.attr, models.q_sim, models.v_sim, models.qgen, ws.vocab};
        std::vector<qgen::BeamCache> caches(val_pairs.size());
        std::vector<std::vector<metrics::WeightedReference>> refs;
        for (auto const* p : val_pairs) {
            refs.push_back(weighted_references(*p));
        }
        json grid = json::array();
        double best = -std::numeric_limits<double>::infinity();
        for (double alpha : config.selector.grid) {
            for (double beta : config.selector.grid) {
                auto trial = selector;
                trial.alpha = alpha;
                trial.beta = beta;
                std::vector<metrics::Tokens> hyps;
                for (std::size_t n = 0; n < val_pairs.size(); ++n) {
                    auto const& p = *val_pairs[n];
                    auto const gen = qgen::generate_discriminative(ws.store.region(p.region_a),
                                                                   ws.store.region(p.region_b), dm, trial, beam,
                                                                   qgen::Method::acqg_full, &caches[n]);
                    hyps.push_back(gen.best.words);
                }
                double const score = metrics::delta_bleu_corpus(hyps, refs).score;
                grid.push_back({{"alpha", alpha}, {"beta", beta}, {"delta_bleu", score}});
                if (score > best) {
                    best = score;
                    selector.alpha = alpha;
                    selector.beta = beta;
                }
            }
        }
        selector_json = {{"tuned", true}, {"validation_pairs", val_pairs.size()},
                         {"validation_delta_bleu", best}, {"grid", grid}};
    }
    selector_json["alpha"] = selector.alpha;
    selector_json["beta"] = selector.beta;
    selector_json["top_k"] = selector.top_k;
    selector_json["mode"] = pairselect::mode_name(selector.mode);
    write_json_file(out / kSelectorFile, selector_json);

    require_file(out / "attr.ckpt", "train-attr");
    auto const attr = attributes::load_attr_model(out / "attr.ckpt");
    auto const q_sim = read_matrix(out / "q_sim.csv", "train-vqa");
    auto const v_sim = read_matrix(out / "v_sim.csv", "train-attr");
    std::string lines;
    std::size_t warnings = 0;
    for (auto const& p : ws.store.pairs()) {
        auto const split = ws.pair_split.find(p.pair_id);
        auto const fa = attributes::predict_attributes(attr, ws.store.region(p.region_a));
        auto const fb = attributes::predict_attributes(attr, ws.store.region(p.region_b));
        std::vector<double> const va(fa.begin(), fa.end());
        std::vector<double> const vb(fb.begin(), fb.end());
        auto const ranking = pairselect::rank_pairs_topk(va, vb, q_sim, v_sim, selector);
        warnings += ranking.warnings.size();
        json top = json::array();
        for (auto const& s : ranking.pairs) {
            top.push_back({{"i", s.i},
                           {"j", s.j},
                           {"att_i", ws.attrs.expression(s.i)},
                           {"att_j", ws.attrs.expression(s.j)},
                           {"contrast", s.contrast},
                           {"q_sim", s.q_sim},
                           {"v_sim", s.v_sim},
                           {"score", s.score}});
        }
        json const line{{"pair_id", p.pair_id},
                        {"split", split == ws.pair_split.end() ? "none" : corpus::split_name(split->second)},
                        {"top", top}};
        lines += line.dump() + "\n";
    }
    write_text(out / "pairs_scored.jsonl", lines);
    return {{"alpha", selector.alpha},
            {"beta", selector.beta},
            {"tuned", tune},
            {"pairs", ws.store.pairs().size()},
            {"warnings", warnings}};
}

Status stage_generate(RunConfig const& config) {
    auto const ws = load_workspace(config);
    fs::path const out = config.out_dir();
    auto selector = base_selector(config);
    if (config.selector.tune && fs::exists(out / kSelectorFile)) {
        json const tuned = read_json_file(out / kSelectorFile, "select");
        selector.alpha = tuned.at("alpha").get<double>();
        selector.beta = tuned.at("beta").get<double>();
    }
    auto const beam = beam_config(config);
    auto const methods = selected_methods(config);
    auto const test_pairs = ws.pairs(corpus::Split::test);

    std::optional<LoadedModels> models;
    std::optional<qgen::QGenModel<float>> baseline;
    std::optional<qgen::RetrievalIndex> index;
    for (auto m : methods) {
        if (qgen::uses_attributes(m) && !models) {
            models = load_discriminative(config);
        } else if (m == qgen::Method::cnn_lstm && !baseline) {
            require_file(out / "baseline.ckpt", "train-baseline");
            baseline = qgen::load_qgen_model(out / "baseline.ckpt");
        } else if (m == qgen::Method::retrieval && !index) {
            index = qgen::RetrievalIndex::build(ws.regions(corpus::Split::train));
        }
    }

    std::vector<qgen::BeamCache> caches(test_pairs.size());
    json counts = json::object();
    for (auto m : methods) {
        std::string lines;
        std::size_t low_confidence = 0;
        for (std::size_t n = 0; n < test_pairs.size(); ++n) {
            auto const& p = *test_pairs[n];
            auto const& a = ws.store.region(p.region_a);
            auto const& b = ws.store.region(p.region_b);
            qgen::GeneratedQuestion q;
            if (m == qgen::Method::retrieval) {
                q = qgen::retrieval_baseline(a, b, *index, config.retrieval_k).question;
            } else if (m == qgen::Method::cnn_lstm) {
                q = qgen::generate_plain(a, b, *baseline, ws.vocab, beam);
            } else {
                qgen::DiscriminativeModels const dm{models->attr, models->q_sim, models->v_sim, models->qgen, ws.vocab};
                q = qgen::generate_discriminative(a, b, dm, qgen::selector_for(m, selector), beam, m, &caches[n]).best;
            }
            low_confidence += q.low_confidence ? 1 : 0;
            lines += question_record(p.pair_id, q, ws.attrs).dump() + "\n";
        }
        write_text(out / qgen::method_name(m) / "generated.jsonl", lines);
        counts[qgen::method_name(m)] = {{"pairs", test_pairs.size()}, {"low_confidence", low_confidence}};
    }
    return {{"alpha", selector.alpha}, {"beta", selector.beta}, {"methods", counts}};
}

std::vector<GeneratedRecord> read_generated(fs::path const& path) {
    require_file(path, "generate");
    std::ifstream in(path);
    std::vector<GeneratedRecord> records;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.empty()) {
            continue;
        }
        try {
            json j = json::parse(line);
            records.push_back({j.at("pair_id").get<std::string>(), j.at("question").get<std::string>(), j});
        } catch (json::exception const& e) {
            throw ParseError(path.string() + ":" + std::to_string(number) + ": " + e.what());
        }
    }
    return records;
}

std::vector<std::string> hard_subset(corpus::CorpusStore const& store, std::vector<std::string> const& pair_ids) {
    std::map<std::string, corpus::EvalPair const*> by_id;
    for (auto const& p : store.pairs()) {
        by_id[p.pair_id] = &p;
    }
    struct Entry {
        std::size_t position;
        double ratio;
    };
    std::map<std::string, std::vector<Entry>> groups;
    for (std::size_t n = 0; n < pair_ids.size(); ++n) {
        auto it = by_id.find(pair_ids[n]);
        if (it == by_id.end()) {
            throw DataError("unknown pair " + pair_ids[n]);
        }
        auto const& pair = *it->second;
        std::size_t positive = 0;
        for (auto const& r : pair.references) {
            positive += r.rating == corpus::Rating::neg ? 0 : 1;
        }
        double const ratio = pair.references.empty()
                                 ? 0.0
                                 : static_cast<double>(positive) / static_cast<double>(pair.references.size());
        groups[store.region(pair.region_a).category.value_or("")].push_back({n, ratio});
    }
    std::vector<std::size_t> keep;
    for (auto& [category, entries] : groups) {
        std::stable_sort(entries.begin(), entries.end(),
                         [](Entry const& x, Entry const& y) { return x.ratio < y.ratio; });
        std::size_t const take = (entries.size() + 1) / 2;
        for (std::size_t n = 0; n < take; ++n) {
            keep.push_back(entries[n].position);
        }
    }
    std::sort(keep.begin(), keep.end());
    std::vector<std::string> out;
    for (auto n : keep) {
        out.push_back(pair_ids[n]);
    }
    return out;
}

MethodScores score_generated(corpus::CorpusStore const& store, std::vector<GeneratedRecord> const& generated,
                             std::vector<std::string> const& pair_ids, std::string const& method) {
    std::map<std::string, GeneratedRecord const*> by_pair;
    for (auto const& g : generated) {
        by_pair.emplace(g.pair_id, &g);
    }
    std::map<std::string, corpus::EvalPair const*> pairs;
    for (auto const& p : store.pairs()) {
        pairs[p.pair_id] = &p;
    }
    std::vector<metrics::Tokens> hyps;
    std::vector<std::vector<metrics::WeightedReference>> weighted;
    std::vector<std::vector<metrics::Tokens>> plain;
    for (auto const& id : pair_ids) {
        auto g = by_pair.find(id);
        if (g == by_pair.end()) {
            throw DataError(method + ": no generated question for pair " + id);
        }
        auto p = pairs.find(id);
        if (p == pairs.end()) {
            throw DataError("unknown pair " + id);
        }
        hyps.push_back(corpus::tokenize(g->second->question));
        weighted.push_back(weighted_references(*p->second));
        plain.push_back(plain_references(*p->second));
    }
    MethodScores s;
    s.method = method;
    s.n = hyps.size();
    s.delta_bleu = metrics::delta_bleu_corpus(hyps, weighted);
    s.bleu = metrics::bleu_corpus(hyps, plain);
    return s;
}

json scores_to_json(MethodScores const& s) {
    return {{"method", s.method},
            {"n", s.n},
            {"delta_bleu", s.delta_bleu.score},
            {"bleu", s.bleu.score},
            {"p_n", s.delta_bleu.precisions},
            {"bp", s.delta_bleu.brevity_penalty},
            {"rho", s.delta_bleu.hypothesis_length},
            {"eta", s.delta_bleu.effective_reference_length},
            {"bleu_p_n", s.bleu.precisions},
            {"bleu_bp", s.bleu.brevity_penalty},
            {"flags",
             {{"all_negative_eta_count", s.delta_bleu.all_negative_eta_count},
              {"clamped_orders", s.delta_bleu.clamped_orders}}},
            {"hard", s.hard}};
}

Status stage_evaluate(RunConfig const& config) {
    auto const ws = load_workspace(config);
    fs::path const out = config.out_dir();
    std::vector<std::string> ids;
    for (auto const* p : ws.pairs(corpus::Split::test)) {
        ids.push_back(p->pair_id);
    }
    if (config.hard) {
        ids = hard_subset(ws.store, ids);
    }
    if (ids.empty()) {
        throw DataError("no evaluation pairs in the test split");
    }
    std::string const suffix = config.hard ? "_hard" : "";
    std::vector<std::string> methods;
    for (auto m : selected_methods(config)) {
        if (config.method != "all" || fs::exists(out / qgen::method_name(m) / "generated.jsonl")) {
            methods.push_back(qgen::method_name(m));
        }
    }
    if (methods.empty()) {
        throw InputError("no generated.jsonl under " + out.string() + " (run generate first)");
    }
    Status status = json::object();
    for (auto const& method : methods) {
        fs::path const dir = out / method;
        auto const generated = read_generated(dir / "generated.jsonl");
        auto scores = score_generated(ws.store, generated, ids, method);
        scores.hard = config.hard;
        write_json_file(dir / ("scores" + suffix + ".json"), scores_to_json(scores));

        std::map<std::string, GeneratedRecord const*> by_pair;
        for (auto const& g : generated) {
            by_pair.emplace(g.pair_id, &g);
        }
        std::string csv = "pair_id,question,delta_bleu,bleu\n";
        for (auto const& id : ids) {
            auto const& g = *by_pair.at(id);
            auto const one = score_generated(ws.store, generated, {id}, method);
            csv += id + "," + csv_field(g.question) + "," + format_percent(one.delta_bleu.score) + "," +
                   format_percent(one.bleu.score) + "\n";
        }
        write_text(dir / ("per_sample" + suffix + ".csv"), csv);
        status[method] = {{"n", scores.n}, {"delta_bleu", scores.delta_bleu.score}, {"bleu", scores.bleu.score}};
    }
    return {{"hard", config.hard}, {"scores", status}};
}

Status stage_gradcheck(RunConfig const& config) {
    Status models = json::object();
    double worst = 0.0;
    for (auto const& c : run_gradchecks(config.seed)) {
        models[c.model] = {{"max_rel_error", c.result.max_rel_error},
                           {"worst_param", c.result.worst_param},
                           {"coordinates", c.result.coordinates}};
        worst = std::max(worst, c.result.max_rel_error);
    }
    return {{"models", models}, {"max_rel_error", worst}, {"passed", worst < kGradCheckTolerance}};
}

void emit_report(fs::path const& out_dir, std::vector<json> const& scores, std::string const& stem) {
    std::vector<json const*> rows;
    for (auto const m : qgen::kAllMethods) {
        for (auto const& s : scores) {
            if (s.at("method").get<std::string>() == qgen::method_name(m)) {
                rows.push_back(&s);
            }
        }
    }
    std::string csv = "method,n,delta_bleu,bleu\n";
    std::string text = "method        n      delta_bleu  bleu\n";
    for (auto const* s : rows) {
        auto const method = s->at("method").get<std::string>();
        auto const n = s->at("n").get<std::size_t>();
        auto const db = format_percent(s->at("delta_bleu").get<double>());
        auto const b = format_percent(s->at("bleu").get<double>());
        csv += method + "," + std::to_string(n) + "," + db + "," + b + "\n";
        char line[128];
        std::snprintf(line, sizeof line, "%-12s  %-5zu  %-10s  %s\n", method.c_str(), n, db.c_str(), b.c_str());
        text += line;
    }
    write_text(out_dir / (stem + ".csv"), csv);
    write_text(out_dir / (stem + ".txt"), text);
}

Status stage_report(RunConfig const& config) {
    fs::path const out = config.out_dir();
    std::string const suffix = config.hard ? "_hard" : "";
    std::vector<json> scores;
    for (auto m : selected_methods(config)) {
        fs::path const file = out / qgen::method_name(m) / ("scores" + suffix + ".json");
        if (fs::exists(file)) {
            scores.push_back(read_json_file(file, "evaluate"));
        }
    }
    if (scores.empty()) {
        throw InputError("no scores" + suffix + ".json under " + out.string() + " (run evaluate first)");
    }
    std::string const stem = "report" + suffix;
    emit_report(out, scores, stem);
    json methods = json::array();
    for (auto const& s : scores) {
        methods.push_back(s.at("method"));
    }
    return {{"methods", methods}, {"report", (out / (stem + ".csv")).string()}};
}

std::vector<Status> run_pipeline(RunConfig const& config) {
    std::vector<Status> statuses;
    if (config.profile == corpus::Profile::synthetic) {
        statuses.push_back(stage_synth(config));
    }
    statuses.push_back(stage_ingest(config));
    statuses.push_back(stage_train_attr(config));
    statuses.push_back(stage_train_vqa(config));
    statuses.push_back(stage_train_qgen(config));
    statuses.push_back(stage_train_baseline(config));
    statuses.push_back(stage_select(config));
    statuses.push_back(stage_generate(config));
    statuses.push_back(stage_evaluate(config));
    statuses.push_back(stage_report(config));
    return statuses;
}

}  // namespace discrimq::app
