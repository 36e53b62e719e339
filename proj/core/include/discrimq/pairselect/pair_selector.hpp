#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "discrimq/similarity.hpp"

namespace discrimq::pairselect {

enum class RankMode { exact, pruned };

std::string mode_name(RankMode mode);
/// Throws ConfigError.
RankMode parse_mode(std::string const& name);

struct SelectorConfig {
    double alpha = 1.0;
    double beta = 1.0;
    std::size_t top_k = 5;
    RankMode mode = RankMode::exact;

    /// Throws ConfigError for negative weights or top_k == 0.
    void validate() const;
};

/// One scored attribute pair: attribute i fires on A but not B, j on B but
/// not A.
struct PairScore {
    std::size_t i = 0;
    std::size_t j = 0;
    double contrast = 0.0;
    double q_sim = 0.0;
    double v_sim = 0.0;
    /// log contrast + alpha q_sim - beta v_sim; -inf when contrast is 0.
    double log_score = 0.0;
    double score = 0.0;
};

/// Higher score first, then (i, j) lexicographic.
bool ranks_before(PairScore const& x, PairScore const& y);

/// Throws IndexError for i, j >= K and ShapeError when the score vectors
/// and matrices disagree on K.
PairScore score_pair(std::span<double const> va, std::span<double const> vb, std::size_t i, std::size_t j,
                     SimilarityMatrix const& q_sim, SimilarityMatrix const& v_sim, SelectorConfig const& config);

struct Ranking {
    std::vector<PairScore> pairs;
    /// top_k exceeded K*K and was reduced.
    bool clamped = false;
    /// Pairs scored, K*K in exact mode.
    std::size_t evaluated = 0;
    std::vector<std::string> warnings;
};

Ranking rank_pairs_topk(std::span<double const> va, std::span<double const> vb, SimilarityMatrix const& q_sim,
                        SimilarityMatrix const& v_sim, SelectorConfig const& config);

}  // namespace discrimq::pairselect
