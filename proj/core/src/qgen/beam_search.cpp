#include "discrimq/qgen/beam_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "discrimq/errors.hpp"
#include "discrimq/nn/loss.hpp"

namespace discrimq::qgen {

namespace {

using corpus::TokenId;
using corpus::Vocabulary;

template <typename T>
struct Entry {
    std::vector<TokenId> tokens;
    double log_prob = 0.0;
    DecoderState<T> a;
    DecoderState<T> b;
};

struct Candidate {
    std::size_t parent;
    TokenId token;
    bool finished;
    double log_prob;
    std::vector<TokenId> tokens;
};

bool candidate_before(Candidate const& x, Candidate const& y) {
    if (x.log_prob != y.log_prob) {
        return x.log_prob > y.log_prob;
    }
    return x.tokens < y.tokens;
}

Hypothesis to_hypothesis(std::vector<TokenId> tokens, double log_prob, bool finished) {
    Hypothesis h;
    h.tokens = std::move(tokens);
    h.log_prob = log_prob;
    h.finished = finished;
    h.normalized_log_prob = h.tokens.empty() ? 0.0 : log_prob / static_cast<double>(h.tokens.size());
    return h;
}

}  // namespace

template <typename T>
std::vector<T> joint_step(std::span<T const> logp_a, std::span<T const> logp_b) {
    if (logp_a.size() != logp_b.size()) {
        throw ShapeError("joint_step: distributions of size " + std::to_string(logp_a.size()) + " and " +
                         std::to_string(logp_b.size()));
    }
    std::vector<T> sum(logp_a.size());
    for (std::size_t k = 0; k < sum.size(); ++k) {
        T const a = logp_a[k];
        T const b = logp_b[k];
        if (std::isnan(a) || std::isnan(b) || a == std::numeric_limits<T>::infinity() ||
            b == std::numeric_limits<T>::infinity()) {
            throw NumericError("joint_step: input entry " + std::to_string(k) + " is NaN or +inf");
        }
        sum[k] = a + b;
    }
    T const lse = nn::logsumexp<T>(sum);
    if (!std::isfinite(lse)) {
        throw NumericError("joint_step: the two distributions share no support");
    }
    for (auto& v : sum) {
        v -= lse;
    }
    return sum;
}

void BeamConfig::validate() const {
    if (width < 1) {
        throw ConfigError("beam width must be at least 1");
    }
    if (max_len < 1) {
        throw ConfigError("beam max_len must be at least 1");
    }
}

std::vector<TokenId> Hypothesis::words() const {
    std::vector<TokenId> w = tokens;
    if (finished && !w.empty() && w.back() == Vocabulary::kEnd) {
        w.pop_back();
    }
    return w;
}

template <typename T>
std::vector<Hypothesis> beam_search_joint(QGenModel<T> const& model, QGenContext const& ctx_a,
                                          QGenContext const& ctx_b, BeamConfig const& config) {
    config.validate();
    std::vector<Entry<T>> live;
    live.push_back({{}, 0.0, start_decoder(model, ctx_a), start_decoder(model, ctx_b)});
    std::vector<Candidate> done;

    std::vector<Candidate> cands;
    for (std::size_t step = 0; step < config.max_len && !live.empty(); ++step) {
        // Extensions never raise the log probability, so once the best live
        // entry trails the width-th finished one nothing can change.
        if (done.size() >= config.width) {
            std::nth_element(done.begin(), done.begin() + static_cast<std::ptrdiff_t>(config.width - 1), done.end(),
                             candidate_before);
            if (live.front().log_prob < done[config.width - 1].log_prob) {
                break;
            }
        }
        cands.clear();
        for (std::size_t p = 0; p < live.size(); ++p) {
            auto const& e = live[p];
            auto const la = next_log_probs(model, e.a);
            auto const lb = next_log_probs(model, e.b);
            auto const joint = joint_step<T>(la, lb);
            for (std::size_t v = 0; v < joint.size(); ++v) {
                if (joint[v] == -std::numeric_limits<T>::infinity()) {
                    continue;
                }
                auto tokens = e.tokens;
                tokens.push_back(static_cast<TokenId>(v));
                cands.push_back({p, static_cast<TokenId>(v), false, e.log_prob + static_cast<double>(joint[v]),
                                 std::move(tokens)});
            }
        }
        std::stable_sort(cands.begin(), cands.end(), candidate_before);
        bool const last = step + 1 == config.max_len;
        std::vector<Entry<T>> next;
        std::size_t kept = 0;
        for (auto& c : cands) {
            if (c.token == Vocabulary::kEnd) {
                c.finished = true;
                done.push_back(std::move(c));
                continue;
            }
            if (kept == config.width) {
                continue;
            }
            ++kept;
            if (last) {
                done.push_back(std::move(c));
                continue;
            }
            auto const& parent = live[c.parent];
            Entry<T> e;
            e.tokens = std::move(c.tokens);
            e.log_prob = c.log_prob;
            e.a = advance_decoder(model, parent.a, c.token);
            e.b = advance_decoder(model, parent.b, c.token);
            next.push_back(std::move(e));
        }
        live = std::move(next);
    }

    std::size_t const keep = std::min(config.width, done.size());
    std::partial_sort(done.begin(), done.begin() + static_cast<std::ptrdiff_t>(keep), done.end(), candidate_before);
    std::vector<Hypothesis> out;
    for (std::size_t r = 0; r < keep; ++r) {
        out.push_back(to_hypothesis(std::move(done[r].tokens), done[r].log_prob, done[r].finished));
    }
    std::stable_sort(out.begin(), out.end(), [](Hypothesis const& x, Hypothesis const& y) {
        if (x.normalized_log_prob != y.normalized_log_prob) {
            return x.normalized_log_prob > y.normalized_log_prob;
        }
        if (x.log_prob != y.log_prob) {
            return x.log_prob > y.log_prob;
        }
        return x.tokens < y.tokens;
    });
    return out;
}

template <typename T>
Hypothesis greedy_decode(QGenModel<T> const& model, QGenContext const& ctx, std::size_t max_len) {
    auto state = start_decoder(model, ctx);
    std::vector<TokenId> tokens;
    double log_prob = 0.0;
    bool finished = false;
    for (std::size_t step = 0; step < max_len; ++step) {
        auto const logp = next_log_probs(model, state);
        std::size_t best = 0;
        for (std::size_t v = 1; v < logp.size(); ++v) {
            if (logp[v] > logp[best]) {
                best = v;
            }
        }
        tokens.push_back(static_cast<TokenId>(best));
        log_prob += static_cast<double>(logp[best]);
        if (best == Vocabulary::kEnd) {
            finished = true;
            break;
        }
        state = advance_decoder(model, state, static_cast<TokenId>(best));
    }
    return to_hypothesis(std::move(tokens), log_prob, finished);
}

#define DISCRIMQ_INSTANTIATE(T)                                                                            \
    template std::vector<T> joint_step<T>(std::span<T const>, std::span<T const>);                         \
    template std::vector<Hypothesis> beam_search_joint<T>(QGenModel<T> const&, QGenContext const&,         \
                                                          QGenContext const&, BeamConfig const&);          \
    template Hypothesis greedy_decode<T>(QGenModel<T> const&, QGenContext const&, std::size_t);
DISCRIMQ_INSTANTIATE(float)
DISCRIMQ_INSTANTIATE(double)
#undef DISCRIMQ_INSTANTIATE

}  // namespace discrimq::qgen
