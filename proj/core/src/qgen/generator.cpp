#include "discrimq/qgen/generator.hpp"

#include <cmath>

#include "discrimq/errors.hpp"

namespace discrimq::qgen {

namespace {

std::vector<double> to_double(std::vector<float> const& v) {
    return {v.begin(), v.end()};
}

GeneratedQuestion from_hypothesis(Hypothesis const& h, corpus::Vocabulary const& vocab, Method method) {
    GeneratedQuestion q;
    auto const ids = h.words();
    q.words = vocab.decode(ids);
    q.log_prob = h.log_prob;
    q.normalized_log_prob = h.normalized_log_prob;
    q.method = method;
    return q;
}

}  // namespace

std::string method_name(Method method) {
    switch (method) {
    case Method::retrieval:
        return "retrieval";
    case Method::cnn_lstm:
        return "cnn_lstm";
    case Method::acqg_ac:
        return "acqg_ac";
    case Method::acqg_ac_qs:
        return "acqg_ac_qs";
    case Method::acqg_full:
        return "acqg_full";
    }
    return "acqg_full";
}

Method parse_method(std::string const& name) {
    for (Method m : kAllMethods) {
        if (method_name(m) == name) {
            return m;
        }
    }
    throw ConfigError("unknown method '" + name +
                      "' (expected retrieval, cnn_lstm, acqg_ac, acqg_ac_qs or acqg_full)");
}

bool uses_attributes(Method method) {
    return method == Method::acqg_ac || method == Method::acqg_ac_qs || method == Method::acqg_full;
}

pairselect::SelectorConfig selector_for(Method method, pairselect::SelectorConfig base) {
    if (method == Method::acqg_ac) {
        base.alpha = 0.0;
        base.beta = 0.0;
    } else if (method == Method::acqg_ac_qs) {
        base.beta = 0.0;
    }
    return base;
}

Generation generate_discriminative(corpus::RegionRecord const& a, corpus::RegionRecord const& b,
                                   DiscriminativeModels const& models, pairselect::SelectorConfig const& selector,
                                   BeamConfig const& beam, Method method, BeamCache* cache) {
    if (!models.qgen.conditioned()) {
        throw StateError("discriminative generation needs an attribute-conditioned generator");
    }
    auto const fa = corpus::region_representation(a);
    auto const fb = corpus::region_representation(b);
    auto const va = to_double(attributes::predict_attributes<float>(models.attr, fa));
    auto const vb = to_double(attributes::predict_attributes<float>(models.attr, fb));

    Generation g;
    g.ranking = pairselect::rank_pairs_topk(va, vb, models.q_sim, models.v_sim, selector);
    if (g.ranking.pairs.empty()) {
        throw DataError("no attribute pair to generate from");
    }
    bool const low = g.ranking.pairs.front().score < kLowConfidenceThreshold;

    std::optional<std::size_t> best;
    for (auto const& pair : g.ranking.pairs) {
        std::vector<Hypothesis> fresh;
        std::vector<Hypothesis> const* hyps = &fresh;
        if (cache != nullptr) {
            auto const key = std::make_pair(pair.i, pair.j);
            auto it = cache->find(key);
            if (it == cache->end()) {
                it = cache->emplace(key, beam_search_joint<float>(models.qgen, {fa, pair.i}, {fb, pair.j}, beam)).first;
            }
            hyps = &it->second;
        } else {
            fresh = beam_search_joint<float>(models.qgen, {fa, pair.i}, {fb, pair.j}, beam);
        }
        for (auto const& h : *hyps) {
            auto q = from_hypothesis(h, models.vocab, method);
            q.att_i = pair.i;
            q.att_j = pair.j;
            q.pair_score = pair.score;
            q.final_score = pair.score * std::exp(h.normalized_log_prob);
            q.low_confidence = low;
            if (!best || q.final_score > g.candidates[*best].final_score) {
                best = g.candidates.size();
            }
            g.candidates.push_back(std::move(q));
        }
    }
    g.best = g.candidates[*best];
    return g;
}

GeneratedQuestion generate_plain(corpus::RegionRecord const& a, corpus::RegionRecord const& b,
                                 QGenModel<float> const& baseline, corpus::Vocabulary const& vocab,
                                 BeamConfig const& beam) {
    auto const fa = corpus::region_representation(a);
    auto const fb = corpus::region_representation(b);
    auto const hyps = beam_search_joint<float>(baseline, {fa, std::nullopt}, {fb, std::nullopt}, beam);
    auto q = from_hypothesis(hyps.front(), vocab, Method::cnn_lstm);
    q.final_score = std::exp(q.normalized_log_prob);
    return q;
}

}  // namespace discrimq::qgen
