#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "discrimq/corpus/region.hpp"
#include "discrimq/qgen/generator.hpp"

namespace discrimq::qgen {

using Tokens = std::vector<std::string>;

/// Training regions by representation, with their tokenized questions.
struct RetrievalIndex {
    std::vector<std::vector<float>> features;
    std::vector<std::vector<Tokens>> questions;

    static RetrievalIndex build(std::span<corpus::RegionRecord const* const> regions);
};

inline constexpr std::size_t kDefaultNeighbors = 100;

/// The k indexed regions closest to the pair: distance^2 between [f_a, f_b]
/// and [r, r]. Ties go to the lower index.
std::vector<std::size_t> nearest_regions(RetrievalIndex const& index, std::span<float const> fa,
                                         std::span<float const> fb, std::size_t k);

struct ConsensusPick {
    /// Position in the pool (first occurrence of the chosen question).
    std::size_t position = 0;
    double score = 0.0;
};

/// Scores each pool entry by its mean smoothed sentence BLEU against every
/// other entry; a single-entry pool scores 1. Ties (within 1e-12) go to the
/// earliest entry. Throws DataError for an empty pool.
ConsensusPick consensus_pick(std::span<Tokens const> pool);

struct RetrievalResult {
    GeneratedQuestion question;
    std::vector<std::size_t> neighbors;
    std::size_t pool_size = 0;
};

RetrievalResult retrieval_baseline(corpus::RegionRecord const& a, corpus::RegionRecord const& b,
                                   RetrievalIndex const& index, std::size_t k = kDefaultNeighbors);

}  // namespace discrimq::qgen
