#include "discrimq/attributes/attribute_vocab.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include "discrimq/corpus/tokenizer.hpp"
#include "discrimq/errors.hpp"

namespace discrimq::attributes {

namespace {

std::string pattern_string(PosPattern const& p) {
    std::string s;
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (k > 0) {
            s += ',';
        }
        s += tag_name(p[k]);
    }
    return s;
}

PosPattern parse_pattern(std::string const& s) {
    PosPattern p;
    std::size_t start = 0;
    while (start <= s.size()) {
        std::size_t const comma = s.find(',', start);
        std::size_t const end = comma == std::string::npos ? s.size() : comma;
        p.push_back(parse_tag(s.substr(start, end - start)));
        if (comma == std::string::npos) {
            break;
        }
        start = comma + 1;
    }
    return p;
}

bool contains_run(std::vector<std::string> const& hay, std::vector<std::string> const& needle) {
    return !needle.empty() && needle.size() <= hay.size() &&
           std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

}  // namespace

std::vector<PosPattern> default_pos_rules() {
    using enum PosTag;
    return {{NN}, {JJ}, {VB}, {CD}, {JJ, NN}, {VB, NN}, {IN, NN}, {NN, NN}, {VB, NN, NN}, {IN, NN, NN}};
}

std::string AttributeEntry::expression() const {
    return corpus::join_tokens(tokens);
}

AttributeVocab::AttributeVocab(std::vector<AttributeEntry> entries) : entries_(std::move(entries)) {
    for (std::size_t k = 0; k < entries_.size(); ++k) {
        auto const& e = entries_[k];
        if (e.tokens.empty() || e.tokens.size() > kMaxExpressionLength) {
            throw SchemaError("attribute '" + e.expression() + "' must have 1 to 3 tokens");
        }
        if (e.pattern.size() != e.tokens.size()) {
            throw SchemaError("attribute '" + e.expression() + "' pattern length differs from token count");
        }
        if (!index_.emplace(e.tokens, k).second) {
            throw SchemaError("duplicate attribute '" + e.expression() + "'");
        }
    }
}

AttributeEntry const& AttributeVocab::entry(std::size_t k) const {
    if (k >= entries_.size()) {
        throw IndexError("attribute index " + std::to_string(k) + " out of range for K=" +
                         std::to_string(entries_.size()));
    }
    return entries_[k];
}

std::optional<std::size_t> AttributeVocab::find(std::vector<std::string> const& tokens) const {
    auto it = index_.find(tokens);
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

nlohmann::json AttributeVocab::to_json() const {
    auto j = nlohmann::json::array();
    for (auto const& e : entries_) {
        j.push_back({{"expression", e.expression()}, {"pos_pattern", pattern_string(e.pattern)}});
    }
    return j;
}

AttributeVocab AttributeVocab::from_json(nlohmann::json const& j) {
    if (!j.is_array()) {
        throw SchemaError("attribute vocabulary must be a JSON array");
    }
    std::vector<AttributeEntry> entries;
    for (auto const& item : j) {
        if (!item.contains("expression") || !item.contains("pos_pattern")) {
            throw SchemaError("attribute entry needs 'expression' and 'pos_pattern'");
        }
        AttributeEntry e;
        e.tokens = corpus::tokenize(item.at("expression").get<std::string>());
        e.pattern = parse_pattern(item.at("pos_pattern").get<std::string>());
        entries.push_back(std::move(e));
    }
    return AttributeVocab(std::move(entries));
}

ExtractionResult extract_attribute_vocab(std::span<std::vector<std::string> const> texts,
                                         std::span<std::vector<std::string> const> answers,
                                         std::span<PosPattern const> rules, std::size_t k, std::size_t answer_top_n) {
    std::set<PosPattern> const rule_set(rules.begin(), rules.end());

    std::map<std::vector<std::string>, std::size_t> answer_freq;
    for (auto const& a : answers) {
        if (!a.empty()) {
            ++answer_freq[a];
        }
    }
    std::vector<std::pair<std::vector<std::string>, std::size_t>> ranked(answer_freq.begin(), answer_freq.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](auto const& x, auto const& y) { return x.second > y.second; });
    std::set<std::string> answer_tokens;
    for (std::size_t r = 0; r < std::min(answer_top_n, ranked.size()); ++r) {
        answer_tokens.insert(ranked[r].first.begin(), ranked[r].first.end());
    }

    std::map<std::vector<std::string>, std::size_t> counts;
    auto count_text = [&](std::vector<std::string> const& tokens) {
        auto const tags = pos_tag_lite(tokens);
        for (std::size_t start = 0; start < tokens.size(); ++start) {
            for (std::size_t n = 1; n <= kMaxExpressionLength && start + n <= tokens.size(); ++n) {
                PosPattern const p(tags.begin() + start, tags.begin() + start + n);
                if (rule_set.contains(p)) {
                    ++counts[std::vector<std::string>(tokens.begin() + start, tokens.begin() + start + n)];
                }
            }
        }
    };
    for (auto const& t : texts) {
        count_text(t);
    }
    for (auto const& a : answers) {
        count_text(a);
    }

    std::vector<std::pair<std::vector<std::string>, std::size_t>> candidates;
    for (auto const& [tokens, freq] : counts) {
        bool const overlaps =
            std::any_of(tokens.begin(), tokens.end(), [&](auto const& t) { return answer_tokens.contains(t); });
        if (overlaps) {
            candidates.emplace_back(tokens, freq);
        }
    }
    // std::map iteration is already lexicographic, so a stable sort by
    // frequency gives the tie rule.
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](auto const& x, auto const& y) { return x.second > y.second; });

    ExtractionResult result;
    result.candidates = candidates.size();
    std::size_t const take = std::min(k, candidates.size());
    result.shortfall = k - take;
    std::vector<AttributeEntry> entries;
    for (std::size_t r = 0; r < take; ++r) {
        entries.push_back({candidates[r].first, pos_tag_lite(candidates[r].first)});
        result.frequencies.push_back(candidates[r].second);
    }
    result.vocab = AttributeVocab(std::move(entries));
    return result;
}

AttributeCorpus collect_attribute_corpus(std::span<corpus::RegionRecord const* const> regions) {
    AttributeCorpus out;
    for (auto const* r : regions) {
        for (auto const& d : r->descriptions) {
            out.texts.push_back(corpus::tokenize(d));
        }
        for (auto const& qa : r->questions) {
            out.answers.push_back(corpus::tokenize(qa.answer));
        }
    }
    return out;
}

std::vector<float> label_region(corpus::RegionRecord const& region, AttributeVocab const& vocab) {
    std::vector<std::vector<std::string>> texts;
    for (auto const& d : region.descriptions) {
        texts.push_back(corpus::tokenize(d));
    }
    for (auto const& qa : region.questions) {
        texts.push_back(corpus::tokenize(qa.answer));
    }
    std::vector<float> labels(vocab.size(), 0.0f);
    for (std::size_t k = 0; k < vocab.size(); ++k) {
        auto const& tokens = vocab.entries()[k].tokens;
        for (auto const& t : texts) {
            if (contains_run(t, tokens)) {
                labels[k] = 1.0f;
                break;
            }
        }
    }
    return labels;
}

}  // namespace discrimq::attributes
