#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "discrimq/corpus/vocabulary.hpp"
#include "discrimq/qgen/qgen_model.hpp"

namespace discrimq::qgen {

/// log(p_A * p_B / sum_q p_A(q) p_B(q)) for two log distributions. -inf
/// entries are allowed; NaN or +inf throw NumericError, as does a product
/// with no mass.
template <typename T>
std::vector<T> joint_step(std::span<T const> logp_a, std::span<T const> logp_b);

struct BeamConfig {
    std::size_t width = 5;
    std::size_t max_len = 15;

    /// Throws ConfigError for width or max_len of 0.
    void validate() const;
};

struct Hypothesis {
    /// Generated tokens, ending with the end marker unless cut at max_len.
    std::vector<corpus::TokenId> tokens;
    double log_prob = 0.0;
    /// log_prob divided by the number of generated tokens.
    double normalized_log_prob = 0.0;
    bool finished = false;

    /// Tokens without the end marker.
    [[nodiscard]] std::vector<corpus::TokenId> words() const;
};

/// Beam search over the joint distribution of two decoder branches that
/// share the model weights. Each step keeps the `width` best unfinished
/// extensions by accumulated log probability (ties by token sequence); every
/// extension by the end marker goes to a finished pool, as do the survivors
/// of step max_len. Search stops early once the best unfinished hypothesis
/// trails the width-th finished one. Returns the `width` best of the pool by
/// log probability, sorted by normalized log probability, best first.
template <typename T>
std::vector<Hypothesis> beam_search_joint(QGenModel<T> const& model, QGenContext const& ctx_a,
                                          QGenContext const& ctx_b, BeamConfig const& config);

/// Most probable next token at each step under a single context.
template <typename T>
Hypothesis greedy_decode(QGenModel<T> const& model, QGenContext const& ctx, std::size_t max_len);

}  // namespace discrimq::qgen
