#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "discrimq/attributes/pos_tagger.hpp"
#include "discrimq/corpus/region.hpp"

namespace discrimq::attributes {

using PosPattern = std::vector<PosTag>;

/// NN; JJ; VB; CD; JJ,NN; VB,NN; IN,NN; NN,NN; VB,NN,NN; IN,NN,NN.
std::vector<PosPattern> default_pos_rules();

inline constexpr std::size_t kMaxExpressionLength = 3;

struct AttributeEntry {
    std::vector<std::string> tokens;
    PosPattern pattern;

    [[nodiscard]] std::string expression() const;
    friend bool operator==(AttributeEntry const&, AttributeEntry const&) = default;
};

class AttributeVocab {
  public:
    AttributeVocab() = default;
    /// Throws SchemaError on duplicate or over-long expressions.
    explicit AttributeVocab(std::vector<AttributeEntry> entries);

    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
    [[nodiscard]] AttributeEntry const& entry(std::size_t k) const;
    [[nodiscard]] std::vector<AttributeEntry> const& entries() const noexcept { return entries_; }
    [[nodiscard]] std::string expression(std::size_t k) const { return entry(k).expression(); }
    [[nodiscard]] std::optional<std::size_t> find(std::vector<std::string> const& tokens) const;

    /// [{"expression": "...", "pos_pattern": "JJ,NN"}, ...]
    [[nodiscard]] nlohmann::json to_json() const;
    static AttributeVocab from_json(nlohmann::json const& j);

    friend bool operator==(AttributeVocab const& a, AttributeVocab const& b) { return a.entries_ == b.entries_; }

  private:
    std::vector<AttributeEntry> entries_;
    std::map<std::vector<std::string>, std::size_t> index_;
};

struct ExtractionResult {
    AttributeVocab vocab;
    /// Candidates that matched a rule and the answer filter.
    std::size_t candidates = 0;
    /// K minus the number returned when too few candidates exist.
    std::size_t shortfall = 0;
    /// Occurrence count of each returned expression, in vocab order.
    std::vector<std::size_t> frequencies;
};

/// Counts every n-gram (n <= 3) of `texts` whose tag sequence matches a
/// rule, keeps those sharing a token with the `answer_top_n` most frequent
/// answers, and returns the K most frequent (ties lexicographic).
ExtractionResult extract_attribute_vocab(std::span<std::vector<std::string> const> texts,
                                         std::span<std::vector<std::string> const> answers,
                                         std::span<PosPattern const> rules, std::size_t k,
                                         std::size_t answer_top_n = 1000);

/// Descriptions and answers of the given regions, tokenized.
struct AttributeCorpus {
    std::vector<std::vector<std::string>> texts;
    std::vector<std::vector<std::string>> answers;
};
AttributeCorpus collect_attribute_corpus(std::span<corpus::RegionRecord const* const> regions);

/// Attribute k is 1 when its tokens occur contiguously in a description or
/// an answer of the region.
std::vector<float> label_region(corpus::RegionRecord const& region, AttributeVocab const& vocab);

}  // namespace discrimq::attributes
