#include "discrimq/corpus/vocabulary.hpp"

#include <algorithm>
#include <unordered_map>

#include "discrimq/errors.hpp"

namespace discrimq::corpus {

Vocabulary::Vocabulary() {
    push("<bos>");
    push("<eos>");
    push("<unk>");
    push("<pad>");
}

void Vocabulary::push(std::string token) {
    auto const id = static_cast<TokenId>(tokens_.size());
    index_.emplace(token, id);
    tokens_.push_back(std::move(token));
}

Vocabulary Vocabulary::build(std::span<std::vector<std::string> const> token_lists, std::size_t min_freq) {
    std::unordered_map<std::string, std::size_t> counts;
    for (auto const& list : token_lists) {
        for (auto const& t : list) {
            ++counts[t];
        }
    }
    std::vector<std::pair<std::string, std::size_t>> kept;
    Vocabulary reserved;
    for (auto& [token, n] : counts) {
        if (n >= std::max<std::size_t>(min_freq, 1) && !reserved.contains(token)) {
            kept.emplace_back(token, n);
        }
    }
    std::sort(kept.begin(), kept.end(), [](auto const& a, auto const& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    Vocabulary v;
    for (auto& [token, n] : kept) {
        v.push(std::move(token));
    }
    return v;
}

TokenId Vocabulary::index(std::string const& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? kUnknown : it->second;
}

std::string const& Vocabulary::token(TokenId id) const {
    if (id >= tokens_.size()) {
        throw IndexError("token id " + std::to_string(id) + " out of vocabulary range");
    }
    return tokens_[id];
}

std::vector<TokenId> Vocabulary::encode(std::vector<std::string> const& tokens) const {
    std::vector<TokenId> ids;
    ids.reserve(tokens.size());
    for (auto const& t : tokens) {
        ids.push_back(index(t));
    }
    return ids;
}

std::vector<std::string> Vocabulary::decode(std::span<TokenId const> ids) const {
    std::vector<std::string> out;
    for (TokenId id : ids) {
        if (id == kBegin || id == kEnd || id == kPad) {
            continue;
        }
        out.push_back(token(id));
    }
    return out;
}

nlohmann::json Vocabulary::to_json() const {
    return nlohmann::json{{"tokens", std::vector<std::string>(tokens_.begin() + kReserved, tokens_.end())}};
}

Vocabulary Vocabulary::from_json(nlohmann::json const& j) {
    Vocabulary v;
    for (auto const& t : j.at("tokens")) {
        auto s = t.get<std::string>();
        if (v.contains(s)) {
            throw SchemaError("vocabulary lists '" + s + "' twice");
        }
        v.push(std::move(s));
    }
    return v;
}

QuestionSequence make_question_sequence(Vocabulary const& vocab, std::vector<std::string> const& words,
                                        std::size_t max_len) {
    QuestionSequence q;
    q.tokens.push_back(Vocabulary::kBegin);
    for (std::size_t i = 0; i < words.size() && i < max_len; ++i) {
        q.tokens.push_back(vocab.index(words[i]));
    }
    q.tokens.push_back(Vocabulary::kEnd);
    return q;
}

bool is_valid_question_sequence(QuestionSequence const& q, std::size_t max_len) {
    if (q.tokens.size() < 2 || q.tokens.front() != Vocabulary::kBegin || q.tokens.back() != Vocabulary::kEnd) {
        return false;
    }
    if (q.tokens.size() - 2 > max_len) {
        return false;
    }
    for (std::size_t i = 1; i + 1 < q.tokens.size(); ++i) {
        if (q.tokens[i] == Vocabulary::kBegin || q.tokens[i] == Vocabulary::kEnd || q.tokens[i] == Vocabulary::kPad) {
            return false;
        }
    }
    return true;
}

}  // namespace discrimq::corpus
