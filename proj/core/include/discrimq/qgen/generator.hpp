#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "discrimq/attributes/attr_model.hpp"
#include "discrimq/corpus/region.hpp"
#include "discrimq/corpus/vocabulary.hpp"
#include "discrimq/pairselect/pair_selector.hpp"
#include "discrimq/qgen/beam_search.hpp"
#include "discrimq/qgen/qgen_model.hpp"
#include "discrimq/similarity.hpp"

namespace discrimq::qgen {

enum class Method { retrieval, cnn_lstm, acqg_ac, acqg_ac_qs, acqg_full };

/// Report order.
inline constexpr std::array<Method, 5> kAllMethods{Method::retrieval, Method::cnn_lstm, Method::acqg_ac,
                                                   Method::acqg_ac_qs, Method::acqg_full};

std::string method_name(Method method);
/// Throws ConfigError.
Method parse_method(std::string const& name);
[[nodiscard]] bool uses_attributes(Method method);

/// acqg_ac drops both similarity terms, acqg_ac_qs the visual one.
pairselect::SelectorConfig selector_for(Method method, pairselect::SelectorConfig base);

/// Best pair score below this marks a pair the attributes cannot separate.
inline constexpr double kLowConfidenceThreshold = 1e-3;

struct GeneratedQuestion {
    std::vector<std::string> words;
    double log_prob = 0.0;
    double normalized_log_prob = 0.0;
    std::optional<std::size_t> att_i;
    std::optional<std::size_t> att_j;
    double pair_score = 0.0;
    /// pair_score * exp(normalized_log_prob) for attribute methods, the
    /// consensus score for retrieval, exp(normalized_log_prob) otherwise.
    double final_score = 0.0;
    bool low_confidence = false;
    Method method = Method::acqg_full;
};

struct DiscriminativeModels {
    attributes::AttrModel<float> const& attr;
    SimilarityMatrix const& q_sim;
    SimilarityMatrix const& v_sim;
    QGenModel<float> const& qgen;
    corpus::Vocabulary const& vocab;
};

/// Beam results per (att_i, att_j) for one region pair; beams do not depend
/// on the selector weights, so tuning can reuse them.
using BeamCache = std::map<std::pair<std::size_t, std::size_t>, std::vector<Hypothesis>>;

struct Generation {
    GeneratedQuestion best;
    /// Every beam hypothesis of every selected pair, in pair-rank order.
    std::vector<GeneratedQuestion> candidates;
    pairselect::Ranking ranking;
};

/// Attribute prediction on both regions, top pair ranking, one joint beam
/// per pair, then reranking by pair score times exp(normalized log prob).
Generation generate_discriminative(corpus::RegionRecord const& a, corpus::RegionRecord const& b,
                                   DiscriminativeModels const& models, pairselect::SelectorConfig const& selector,
                                   BeamConfig const& beam, Method method = Method::acqg_full,
                                   BeamCache* cache = nullptr);

/// Joint decoding of the unconditioned model over the two regions.
GeneratedQuestion generate_plain(corpus::RegionRecord const& a, corpus::RegionRecord const& b,
                                 QGenModel<float> const& baseline, corpus::Vocabulary const& vocab,
                                 BeamConfig const& beam);

}  // namespace discrimq::qgen
