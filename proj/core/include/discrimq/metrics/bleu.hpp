#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace discrimq::metrics {

using Tokens = std::vector<std::string>;

inline constexpr std::size_t kMaxOrder = 4;
/// Floor for a negative corpus-level n-gram numerator.
inline constexpr double kNumeratorClamp = 1e-9;

struct WeightedReference {
    Tokens tokens;
    /// One of 1.0, 0.5, -0.5.
    double weight = 1.0;
};

struct CorpusScore {
    std::vector<double> precisions;
    std::vector<double> numerators;
    std::vector<double> denominators;
    double brevity_penalty = 1.0;
    std::size_t hypothesis_length = 0;
    std::size_t effective_reference_length = 0;
    double score = 0.0;
    /// Hypotheses without a positive reference, whose length match fell back
    /// to all references.
    std::size_t all_negative_eta_count = 0;
    /// Orders whose numerator was clamped to kNumeratorClamp.
    std::size_t clamped_orders = 0;
};

/// 1 when rho > eta, else exp(1 - eta / rho). Throws DomainError for rho == 0.
double brevity_penalty(std::size_t rho, std::size_t eta);

/// Length of the reference closest to `length`, ties to the shorter one.
std::size_t closest_length(std::size_t length, std::span<std::size_t const> ref_lengths);

/// Corpus BLEU with clipped counts and uniform weights over orders 1..max_n.
/// Zero when any order's numerator is zero. Throws InputError for an empty
/// corpus or a hypothesis without references.
CorpusScore bleu_corpus(std::span<Tokens const> hypotheses, std::span<std::vector<Tokens> const> references,
                        std::size_t max_n = kMaxOrder);

/// Rating-weighted corpus BLEU. Per distinct n-gram g of a hypothesis the
/// numerator takes the best w * min(count_h, count_r) over references that
/// contain g and the denominator the best w * count_h over all references.
/// A zero numerator gives score 0; a negative one is clamped to
/// kNumeratorClamp (as is the precision when the denominator is not
/// positive). The effective reference length uses positive references only.
CorpusScore delta_bleu_corpus(std::span<Tokens const> hypotheses,
                              std::span<std::vector<WeightedReference> const> references,
                              std::size_t max_n = kMaxOrder);

/// Sentence BLEU with add-one smoothing of every order.
double sentence_bleu_smoothed(Tokens const& hypothesis, std::span<Tokens const> references,
                              std::size_t max_n = kMaxOrder);

}  // namespace discrimq::metrics
