#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace discrimq::corpus {

struct TokenizeOptions {
    /// Numerals above one ("2", "three", ...) become the single token
    /// "more_than_one"; "1" becomes "one".
    bool merge_counts = true;
};

inline constexpr std::string_view kMoreThanOne = "more_than_one";

/// Lowercases ASCII and splits on whitespace and punctuation, dropping the
/// punctuation. Underscores and non-ASCII bytes are word characters.
std::vector<std::string> tokenize(std::string_view text, TokenizeOptions const& options = {});

std::string join_tokens(std::vector<std::string> const& tokens);

}  // namespace discrimq::corpus
