#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace discrimq::corpus {

using TokenId = std::uint32_t;

/// Token <-> index map with reserved markers at 0..3.
class Vocabulary {
  public:
    static constexpr TokenId kBegin = 0;
    static constexpr TokenId kEnd = 1;
    static constexpr TokenId kUnknown = 2;
    static constexpr TokenId kPad = 3;
    static constexpr std::size_t kReserved = 4;

    Vocabulary();

    /// Keeps tokens with frequency >= min_freq, ordered by frequency
    /// (descending) then lexicographically.
    static Vocabulary build(std::span<std::vector<std::string> const> token_lists, std::size_t min_freq);

    [[nodiscard]] TokenId index(std::string const& token) const;
    [[nodiscard]] bool contains(std::string const& token) const { return index_.contains(token); }
    [[nodiscard]] std::string const& token(TokenId id) const;
    [[nodiscard]] std::size_t size() const noexcept { return tokens_.size(); }

    [[nodiscard]] std::vector<TokenId> encode(std::vector<std::string> const& tokens) const;
    /// Drops markers.
    [[nodiscard]] std::vector<std::string> decode(std::span<TokenId const> ids) const;

    [[nodiscard]] nlohmann::json to_json() const;
    static Vocabulary from_json(nlohmann::json const& j);

    friend bool operator==(Vocabulary const& a, Vocabulary const& b) { return a.tokens_ == b.tokens_; }

  private:
    void push(std::string token);

    std::vector<std::string> tokens_;
    std::map<std::string, TokenId> index_;
};

/// Begin marker, word ids, end marker.
struct QuestionSequence {
    std::vector<TokenId> tokens;

    [[nodiscard]] std::span<TokenId const> words() const {
        return tokens.size() < 2 ? std::span<TokenId const>{} : std::span<TokenId const>(tokens).subspan(1, tokens.size() - 2);
    }
};

inline constexpr std::size_t kDefaultMaxQuestionLength = 15;

/// Encodes words, truncating to `max_len` words, and wraps them in markers.
QuestionSequence make_question_sequence(Vocabulary const& vocab, std::vector<std::string> const& words,
                                        std::size_t max_len = kDefaultMaxQuestionLength);

/// Marker invariants: begins with kBegin, ends with kEnd, no markers inside,
/// at most max_len words.
bool is_valid_question_sequence(QuestionSequence const& q, std::size_t max_len = kDefaultMaxQuestionLength);

}  // namespace discrimq::corpus
