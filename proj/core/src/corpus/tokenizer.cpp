#include "discrimq/corpus/tokenizer.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace discrimq::corpus {

namespace {

bool is_word_byte(unsigned char c) {
    return std::isalnum(c) != 0 || c == '_' || c >= 0x80;
}

constexpr std::array<std::string_view, 20> kNumberWords = {
    "two",     "three",   "four",      "five",     "six",      "seven",   "eight",
    "nine",    "ten",     "eleven",    "twelve",   "thirteen", "fourteen", "fifteen",
    "sixteen", "seventeen", "eighteen", "nineteen", "twenty",  "hundred"};

std::string rewrite_count(std::string token) {
    if (token == "1") {
        return "one";
    }
    if (!token.empty() && std::all_of(token.begin(), token.end(), [](unsigned char c) { return std::isdigit(c); })) {
        bool const above_one = token.size() > 1 ? token.find_first_not_of('0') != std::string::npos : token[0] > '1';
        if (above_one) {
            return std::string(kMoreThanOne);
        }
        return token;
    }
    if (std::find(kNumberWords.begin(), kNumberWords.end(), token) != kNumberWords.end()) {
        return std::string(kMoreThanOne);
    }
    return token;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text, TokenizeOptions const& options) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) {
            tokens.push_back(options.merge_counts ? rewrite_count(std::move(current)) : std::move(current));
            current.clear();
        }
    };
    for (char ch : text) {
        auto const c = static_cast<unsigned char>(ch);
        if (is_word_byte(c)) {
            current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

std::string join_tokens(std::vector<std::string> const& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i != 0) {
            out.push_back(' ');
        }
        out += tokens[i];
    }
    return out;
}

}  // namespace discrimq::corpus
