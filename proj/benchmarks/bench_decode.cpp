#include <benchmark/benchmark.h>

#include <cmath>

#include "discrimq/qgen/beam_search.hpp"
#include "discrimq/qgen/qgen_model.hpp"
#include "discrimq/rng.hpp"

using namespace discrimq;

namespace {

std::vector<double> log_dist(Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    double z = 0;
    for (auto& x : v) {
        x = rng.normal();
        z += std::exp(x);
    }
    for (auto& x : v) {
        x -= std::log(z);
    }
    return v;
}

void joint(benchmark::State& state) {
    Rng rng(3);
    auto const n = static_cast<std::size_t>(state.range(0));
    auto const a = log_dist(rng, n);
    auto const b = log_dist(rng, n);
    for (auto _ : state) {
        benchmark::DoNotOptimize(qgen::joint_step<double>(a, b));
    }
}

void beam(benchmark::State& state) {
    Rng rng(4);
    qgen::QGenHyper dims;
    dims.embed = 32;
    dims.hidden = 32;
    dims.layers = 2;
    dims.att_dim = 64;
    auto model = qgen::make_qgen_model<float>(qgen::QGenMode::conditioned, 200, 50, 612, dims);
    model.params.init_uniform(rng);
    std::vector<float> fa(50);
    std::vector<float> fb(50);
    for (std::size_t k = 0; k < 50; ++k) {
        fa[k] = static_cast<float>(rng.uniform(-1, 1));
        fb[k] = static_cast<float>(rng.uniform(-1, 1));
    }
    qgen::QGenContext const a{fa, 3};
    qgen::QGenContext const b{fb, 7};
    qgen::BeamConfig const cfg{static_cast<std::size_t>(state.range(0)), 15};
    for (auto _ : state) {
        benchmark::DoNotOptimize(qgen::beam_search_joint(model, a, b, cfg));
    }
}

}  // namespace

BENCHMARK(joint)->Arg(200)->Arg(5000);
BENCHMARK(beam)->Arg(1)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);
