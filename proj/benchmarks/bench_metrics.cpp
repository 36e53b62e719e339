#include <benchmark/benchmark.h>

#include "discrimq/metrics/bleu.hpp"
#include "discrimq/rng.hpp"

using namespace discrimq;

namespace {

metrics::Tokens sentence(Rng& rng) {
    static metrics::Tokens const words{"what", "color", "is", "the", "dog", "cat", "doing", "where", "how",
                                       "many", "this", "kind", "of", "object", "are", "there"};
    metrics::Tokens t(4 + rng.index(8));
    for (auto& w : t) {
        w = words[rng.index(words.size())];
    }
    return t;
}

struct Corpus {
    std::vector<metrics::Tokens> hyps;
    std::vector<std::vector<metrics::WeightedReference>> refs;
    std::vector<std::vector<metrics::Tokens>> plain;
};

Corpus make_corpus(std::size_t n) {
    Rng rng(8);
    Corpus c;
    static constexpr double kWeights[] = {1.0, 0.5, -0.5};
    for (std::size_t i = 0; i < n; ++i) {
        c.hyps.push_back(sentence(rng));
        auto& rated = c.refs.emplace_back();
        auto& plain = c.plain.emplace_back();
        for (int r = 0; r < 9; ++r) {
            auto ref = sentence(rng);
            plain.push_back(ref);
            rated.push_back({std::move(ref), kWeights[rng.index(3)]});
        }
    }
    return c;
}

void bleu(benchmark::State& state) {
    auto const c = make_corpus(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(metrics::bleu_corpus(c.hyps, c.plain));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void delta_bleu(benchmark::State& state) {
    auto const c = make_corpus(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(metrics::delta_bleu_corpus(c.hyps, c.refs));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(bleu)->Arg(100)->Arg(1000)->Unit(benchmark::kMicrosecond);
BENCHMARK(delta_bleu)->Arg(100)->Arg(1000)->Unit(benchmark::kMicrosecond);
