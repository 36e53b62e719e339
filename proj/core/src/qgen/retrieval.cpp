#include "discrimq/qgen/retrieval.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "discrimq/corpus/tokenizer.hpp"
#include "discrimq/errors.hpp"
#include "discrimq/metrics/bleu.hpp"

namespace discrimq::qgen {

RetrievalIndex RetrievalIndex::build(std::span<corpus::RegionRecord const* const> regions) {
    RetrievalIndex index;
    for (auto const* r : regions) {
        index.features.push_back(corpus::region_representation(*r));
        std::vector<Tokens> qs;
        for (auto const& qa : r->questions) {
            auto t = corpus::tokenize(qa.text);
            if (!t.empty()) {
                qs.push_back(std::move(t));
            }
        }
        index.questions.push_back(std::move(qs));
    }
    return index;
}

std::vector<std::size_t> nearest_regions(RetrievalIndex const& index, std::span<float const> fa,
                                         std::span<float const> fb, std::size_t k) {
    std::vector<double> dist(index.features.size());
    for (std::size_t r = 0; r < index.features.size(); ++r) {
        auto const& f = index.features[r];
        if (f.size() != fa.size() || f.size() != fb.size()) {
            throw ShapeError("retrieval feature length mismatch");
        }
        double d = 0.0;
        for (std::size_t c = 0; c < f.size(); ++c) {
            double const da = static_cast<double>(fa[c]) - static_cast<double>(f[c]);
            double const db = static_cast<double>(fb[c]) - static_cast<double>(f[c]);
            d += da * da + db * db;
        }
        dist[r] = d;
    }
    std::vector<std::size_t> order(dist.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::size_t const take = std::min(k, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                      [&](std::size_t x, std::size_t y) { return dist[x] != dist[y] ? dist[x] < dist[y] : x < y; });
    order.resize(take);
    return order;
}

ConsensusPick consensus_pick(std::span<Tokens const> pool) {
    if (pool.empty()) {
        throw DataError("retrieval candidate pool is empty");
    }
    if (pool.size() == 1) {
        return {0, 1.0};
    }
    // Pairwise BLEU is computed once per distinct question pair.
    std::map<Tokens, std::size_t> ids;
    std::vector<std::size_t> id_of(pool.size());
    std::vector<std::size_t> first;
    for (std::size_t p = 0; p < pool.size(); ++p) {
        auto [it, fresh] = ids.emplace(pool[p], first.size());
        if (fresh) {
            first.push_back(p);
        }
        id_of[p] = it->second;
    }
    std::size_t const n = first.size();
    std::vector<double> bleu(n * n);
    for (std::size_t x = 0; x < n; ++x) {
        for (std::size_t y = 0; y < n; ++y) {
            Tokens const& ref = pool[first[y]];
            bleu[x * n + y] = metrics::sentence_bleu_smoothed(pool[first[x]], std::span<Tokens const>(&ref, 1));
        }
    }
    ConsensusPick best{0, -1.0};
    for (std::size_t x = 0; x < n; ++x) {
        std::size_t const self = first[x];
        double sum = 0.0;
        for (std::size_t p = 0; p < pool.size(); ++p) {
            if (p != self) {
                sum += bleu[x * n + id_of[p]];
            }
        }
        double const score = sum / static_cast<double>(pool.size() - 1);
        // Scores equal up to rounding count as ties.
        if (score > best.score + 1e-12) {
            best = {self, score};
        }
    }
    return best;
}

RetrievalResult retrieval_baseline(corpus::RegionRecord const& a, corpus::RegionRecord const& b,
                                   RetrievalIndex const& index, std::size_t k) {
    auto const fa = corpus::region_representation(a);
    auto const fb = corpus::region_representation(b);
    RetrievalResult out;
    out.neighbors = nearest_regions(index, fa, fb, k);
    std::vector<Tokens> pool;
    for (std::size_t r : out.neighbors) {
        pool.insert(pool.end(), index.questions[r].begin(), index.questions[r].end());
    }
    out.pool_size = pool.size();
    auto const pick = consensus_pick(pool);
    out.question.words = pool[pick.position];
    out.question.final_score = pick.score;
    out.question.method = Method::retrieval;
    return out;
}

}  // namespace discrimq::qgen
