#include "discrimq/attributes/pos_tagger.hpp"

#include <array>
#include <unordered_map>

#include "discrimq/errors.hpp"

namespace discrimq::attributes {

namespace {

using Lexicon = std::unordered_map<std::string_view, PosTag>;

Lexicon build_lexicon() {
    Lexicon lex;
    auto add = [&lex](PosTag tag, std::initializer_list<std::string_view> words) {
        for (auto w : words) {
            lex.emplace(w, tag);
        }
    };
    add(PosTag::OTHER, {"a",     "an",    "the",   "this",  "that",  "these", "those", "is",    "are",   "was",
                        "were",  "be",    "been",  "being", "am",    "does",  "did",   "has",   "have",  "had",
                        "can",   "could", "will",  "would", "should", "may",  "might", "must",  "what",  "which",
                        "who",   "whom",  "whose", "where", "when",  "why",   "how",   "there", "here",  "it",
                        "its",   "he",    "she",   "they",  "them",  "his",   "her",   "their", "i",     "you",
                        "we",    "my",    "your",  "our",   "and",   "or",    "but",   "not",   "no",    "yes",
                        "many",  "much",  "some",  "any",   "very",  "too",   "also",  "so",    "than",  "then",
                        "if",    "all",   "each",  "every", "both",  "either", "neither", "to"});
    add(PosTag::IN, {"on",      "in",     "at",     "of",    "with",   "by",    "from",    "under",  "over",
                     "above",   "below",  "behind", "near",  "beside", "next",  "inside",  "outside", "into",
                     "onto",    "across", "along",  "around", "between", "through", "against", "for",   "about",
                     "up",      "down",   "off",    "out",   "during", "without", "beneath", "atop"});
    add(PosTag::CD, {"zero",  "one",   "two",   "three",  "four",   "five",   "six",           "seven",
                     "eight", "nine",  "ten",   "eleven", "twelve", "dozen",  "more_than_one", "hundred"});
    add(PosTag::JJ, {"red",    "blue",   "green",  "yellow", "white",  "black",  "brown",   "gray",    "grey",
                     "orange", "pink",   "purple", "silver", "gold",   "golden", "dark",    "light",   "bright",
                     "big",    "small",  "large",  "little", "tall",   "short",  "long",    "wide",    "narrow",
                     "old",    "new",    "young",  "wooden", "metal",  "plastic", "glass",  "striped", "plaid",
                     "open",   "closed", "empty",  "full",   "clear",  "cloudy", "sunny",   "wet",     "dry",
                     "clean",  "dirty",  "round",  "square", "flat",   "thick",  "thin",    "high",    "low",
                     "hot",    "cold",   "happy",  "sad",    "calm",   "busy",   "bare",    "leafy",   "snowy",
                     "grassy", "sandy",  "rocky",  "shiny",  "fluffy", "furry",  "colorful", "multicolored"});
    add(PosTag::VB, {"run",    "sit",    "stand",  "sleep",  "jump",   "walk",   "eat",     "drink",   "fly",
                     "swim",   "ride",   "play",   "hold",   "wear",   "look",   "stare",   "lie",     "lay",
                     "read",   "talk",   "smile",  "throw",  "catch",  "kick",   "hit",     "carry",   "pull",
                     "push",   "drive",  "park",   "cross",  "climb",  "surf",   "ski",     "skate",   "skateboard",
                     "watch",  "wait",   "do",     "go",     "make",   "take",   "use",     "cut",     "cook",
                     "graze",  "fill",   "cover",  "hang",   "grow",   "rest",   "lean",    "perch",   "float",
                     "sail",   "serve",  "swing",  "bite",   "chase",  "fetch",  "bark",    "land",    "dance",
                     "sing",   "write",  "sits",   "stands", "runs",   "sleeps",  "jumps",   "holds",
                     "wears",  "plays",  "rides",  "eats",   "looks",  "flies",  "walks",   "lies"});
    return lex;
}

Lexicon const& lexicon() {
    static Lexicon const lex = build_lexicon();
    return lex;
}

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() > suffix.size() + 1 && s.substr(s.size() - suffix.size()) == suffix;
}

bool all_digits(std::string_view s) {
    if (s.empty()) {
        return false;
    }
    for (char ch : s) {
        if (ch < '0' || ch > '9') {
            return false;
        }
    }
    return true;
}

}  // namespace

std::string_view tag_name(PosTag tag) {
    switch (tag) {
    case PosTag::NN:
        return "NN";
    case PosTag::JJ:
        return "JJ";
    case PosTag::VB:
        return "VB";
    case PosTag::CD:
        return "CD";
    case PosTag::IN:
        return "IN";
    case PosTag::OTHER:
        return "OTHER";
    }
    return "OTHER";
}

PosTag parse_tag(std::string_view name) {
    static constexpr std::array all{PosTag::NN, PosTag::JJ, PosTag::VB, PosTag::CD, PosTag::IN, PosTag::OTHER};
    for (PosTag t : all) {
        if (tag_name(t) == name) {
            return t;
        }
    }
    throw ParseError("unknown part-of-speech tag '" + std::string(name) + "'");
}

PosTag tag_token(std::string_view token) {
    auto const& lex = lexicon();
    if (auto it = lex.find(token); it != lex.end()) {
        return it->second;
    }
    if (all_digits(token)) {
        return PosTag::CD;
    }
    if (ends_with(token, "ing") || ends_with(token, "ed")) {
        return PosTag::VB;
    }
    if (ends_with(token, "ly")) {
        return PosTag::OTHER;
    }
    for (std::string_view suffix : {"ous", "ful", "ive", "able", "ible", "ish", "less", "ic", "ary"}) {
        if (ends_with(token, suffix)) {
            return PosTag::JJ;
        }
    }
    return PosTag::NN;
}

std::vector<PosTag> pos_tag_lite(std::vector<std::string> const& tokens) {
    std::vector<PosTag> tags;
    tags.reserve(tokens.size());
    for (auto const& t : tokens) {
        tags.push_back(tag_token(t));
    }
    return tags;
}

}  // namespace discrimq::attributes
