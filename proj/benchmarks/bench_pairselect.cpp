#include <benchmark/benchmark.h>

#include "discrimq/pairselect/pair_selector.hpp"
#include "discrimq/rng.hpp"
#include "discrimq/similarity.hpp"

using namespace discrimq;

namespace {

struct Instance {
    std::vector<double> va;
    std::vector<double> vb;
    SimilarityMatrix q;
    SimilarityMatrix v;
};

SimilarityMatrix random_symmetric(Rng& rng, std::size_t k) {
    std::vector<double> m(k * k);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i; j < k; ++j) {
            m[i * k + j] = m[j * k + i] = rng.normal();
        }
    }
    return {k, m};
}

Instance make_instance(std::size_t k) {
    Rng rng(612);
    Instance x;
    for (std::size_t i = 0; i < k; ++i) {
        x.va.push_back(rng.uniform());
        x.vb.push_back(rng.uniform());
    }
    x.q = random_symmetric(rng, k);
    x.v = random_symmetric(rng, k);
    return x;
}

void rank(benchmark::State& state, pairselect::RankMode mode) {
    auto const x = make_instance(static_cast<std::size_t>(state.range(0)));
    pairselect::SelectorConfig const cfg{1.0, 1.0, 5, mode};
    std::size_t evaluated = 0;
    for (auto _ : state) {
        auto r = pairselect::rank_pairs_topk(x.va, x.vb, x.q, x.v, cfg);
        evaluated = r.evaluated;
        benchmark::DoNotOptimize(r);
    }
    state.counters["evaluated"] = static_cast<double>(evaluated);
}

}  // namespace

BENCHMARK_CAPTURE(rank, exact, pairselect::RankMode::exact)->Arg(64)->Arg(612)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(rank, pruned, pairselect::RankMode::pruned)->Arg(64)->Arg(612)->Unit(benchmark::kMillisecond);
