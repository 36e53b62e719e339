#include "discrimq/metrics/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>

#include "discrimq/errors.hpp"

namespace discrimq::metrics {

namespace {

using Counts = std::map<std::vector<std::string>, std::size_t>;

Counts ngram_counts(Tokens const& tokens, std::size_t n) {
    Counts c;
    for (std::size_t s = 0; s + n <= tokens.size(); ++s) {
        ++c[Tokens(tokens.begin() + static_cast<std::ptrdiff_t>(s), tokens.begin() + static_cast<std::ptrdiff_t>(s + n))];
    }
    return c;
}

std::size_t lookup(Counts const& c, Tokens const& g) {
    auto it = c.find(g);
    return it == c.end() ? 0 : it->second;
}

void check_weight(double w) {
    if (w != 1.0 && w != 0.5 && w != -0.5) {
        throw InputError("reference weight " + std::to_string(w) + " is not one of 1.0, 0.5, -0.5");
    }
}

void finish(CorpusScore& s, std::size_t max_n, bool allow_clamp) {
    s.precisions.assign(max_n, 0.0);
    bool zero = false;
    double log_sum = 0.0;
    for (std::size_t n = 0; n < max_n; ++n) {
        double const num = s.numerators[n];
        double const den = s.denominators[n];
        if (num == 0.0) {
            zero = true;
            continue;
        }
        double p = 0.0;
        if (allow_clamp && (num < 0.0 || den <= 0.0)) {
            p = num < 0.0 && den > 0.0 ? kNumeratorClamp / den : kNumeratorClamp;
            ++s.clamped_orders;
        } else {
            p = num / den;
        }
        s.precisions[n] = p;
        log_sum += std::log(p);
    }
    if (s.hypothesis_length == 0) {
        s.brevity_penalty = 0.0;
        s.score = 0.0;
        return;
    }
    s.brevity_penalty = brevity_penalty(s.hypothesis_length, s.effective_reference_length);
    s.score = zero ? 0.0 : s.brevity_penalty * std::exp(log_sum / static_cast<double>(max_n));
}

void check_corpus(std::size_t hyps, std::size_t refs, std::size_t max_n) {
    if (hyps == 0) {
        throw InputError("cannot score an empty corpus");
    }
    if (hyps != refs) {
        throw InputError("hypothesis and reference-set counts differ");
    }
    if (max_n == 0) {
        throw InputError("max n-gram order must be positive");
    }
}

}  // namespace

double brevity_penalty(std::size_t rho, std::size_t eta) {
    if (rho == 0) {
        throw DomainError("brevity penalty needs a positive hypothesis length");
    }
    if (rho > eta) {
        return 1.0;
    }
    return std::exp(1.0 - static_cast<double>(eta) / static_cast<double>(rho));
}

std::size_t closest_length(std::size_t length, std::span<std::size_t const> ref_lengths) {
    std::size_t best = ref_lengths.front();
    auto dist = [length](std::size_t r) { return r > length ? r - length : length - r; };
    for (std::size_t r : ref_lengths) {
        if (dist(r) < dist(best) || (dist(r) == dist(best) && r < best)) {
            best = r;
        }
    }
    return best;
}

CorpusScore bleu_corpus(std::span<Tokens const> hypotheses, std::span<std::vector<Tokens> const> references,
                        std::size_t max_n) {
    check_corpus(hypotheses.size(), references.size(), max_n);
    CorpusScore s;
    s.numerators.assign(max_n, 0.0);
    s.denominators.assign(max_n, 0.0);
    for (std::size_t i = 0; i < hypotheses.size(); ++i) {
        auto const& h = hypotheses[i];
        auto const& refs = references[i];
        if (refs.empty()) {
            throw InputError("hypothesis " + std::to_string(i) + " has no references");
        }
        std::vector<std::size_t> lengths;
        for (auto const& r : refs) {
            lengths.push_back(r.size());
        }
        s.hypothesis_length += h.size();
        s.effective_reference_length += closest_length(h.size(), lengths);
        for (std::size_t n = 1; n <= max_n; ++n) {
            auto const hc = ngram_counts(h, n);
            std::vector<Counts> rc;
            for (auto const& r : refs) {
                rc.push_back(ngram_counts(r, n));
            }
            for (auto const& [g, count] : hc) {
                std::size_t best = 0;
                for (auto const& c : rc) {
                    best = std::max(best, lookup(c, g));
                }
                s.numerators[n - 1] += static_cast<double>(std::min(count, best));
                s.denominators[n - 1] += static_cast<double>(count);
            }
        }
    }
    finish(s, max_n, false);
    return s;
}

CorpusScore delta_bleu_corpus(std::span<Tokens const> hypotheses,
                              std::span<std::vector<WeightedReference> const> references, std::size_t max_n) {
    check_corpus(hypotheses.size(), references.size(), max_n);
    CorpusScore s;
    s.numerators.assign(max_n, 0.0);
    s.denominators.assign(max_n, 0.0);
    for (std::size_t i = 0; i < hypotheses.size(); ++i) {
        auto const& h = hypotheses[i];
        auto const& refs = references[i];
        if (refs.empty()) {
            throw InputError("hypothesis " + std::to_string(i) + " has an empty rated reference set");
        }
        std::vector<std::size_t> positive;
        std::vector<std::size_t> all;
        for (auto const& r : refs) {
            check_weight(r.weight);
            all.push_back(r.tokens.size());
            if (r.weight > 0.0) {
                positive.push_back(r.tokens.size());
            }
        }
        if (positive.empty()) {
            ++s.all_negative_eta_count;
        }
        s.hypothesis_length += h.size();
        s.effective_reference_length += closest_length(h.size(), positive.empty() ? all : positive);

        double max_weight = refs.front().weight;
        for (auto const& r : refs) {
            max_weight = std::max(max_weight, r.weight);
        }
        for (std::size_t n = 1; n <= max_n; ++n) {
            auto const hc = ngram_counts(h, n);
            std::vector<Counts> rc;
            for (auto const& r : refs) {
                rc.push_back(ngram_counts(r.tokens, n));
            }
            for (auto const& [g, count] : hc) {
                bool matched = false;
                double best = 0.0;
                for (std::size_t j = 0; j < refs.size(); ++j) {
                    std::size_t const rcount = lookup(rc[j], g);
                    if (rcount == 0) {
                        continue;
                    }
                    double const v = refs[j].weight * static_cast<double>(std::min(count, rcount));
                    if (!matched || v > best) {
                        best = v;
                        matched = true;
                    }
                }
                s.numerators[n - 1] += matched ? best : 0.0;
                s.denominators[n - 1] += max_weight * static_cast<double>(count);
            }
        }
    }
    finish(s, max_n, true);
    return s;
}

double sentence_bleu_smoothed(Tokens const& hypothesis, std::span<Tokens const> references, std::size_t max_n) {
    if (references.empty()) {
        throw InputError("sentence BLEU needs at least one reference");
    }
    if (hypothesis.empty()) {
        return 0.0;
    }
    double log_sum = 0.0;
    for (std::size_t n = 1; n <= max_n; ++n) {
        auto const hc = ngram_counts(hypothesis, n);
        std::vector<Counts> rc;
        for (auto const& r : references) {
            rc.push_back(ngram_counts(r, n));
        }
        double clipped = 0.0;
        double total = 0.0;
        for (auto const& [g, count] : hc) {
            std::size_t best = 0;
            for (auto const& c : rc) {
                best = std::max(best, lookup(c, g));
            }
            clipped += static_cast<double>(std::min(count, best));
            total += static_cast<double>(count);
        }
        log_sum += std::log((clipped + 1.0) / (total + 1.0));
    }
    std::vector<std::size_t> lengths;
    for (auto const& r : references) {
        lengths.push_back(r.size());
    }
    double const bp = brevity_penalty(hypothesis.size(), closest_length(hypothesis.size(), lengths));
    return bp * std::exp(log_sum / static_cast<double>(max_n));
}

}  // namespace discrimq::metrics
