#include "discrimq/app/gradcheck_suite.hpp"

#include <numeric>

#include "discrimq/attributes/attr_model.hpp"
#include "discrimq/qgen/qgen_model.hpp"
#include "discrimq/rng.hpp"
#include "discrimq/vqa/vqa_model.hpp"

namespace discrimq::app {

namespace {

constexpr std::size_t kVocab = 7;
constexpr std::size_t kFeature = 5;
constexpr std::size_t kAttributes = 4;

std::vector<float> random_feature(Rng& rng, std::size_t n) {
    std::vector<float> f(n);
    for (auto& x : f) {
        x = static_cast<float>(rng.uniform(-1.0, 1.0));
    }
    return f;
}

std::vector<corpus::TokenId> random_words(Rng& rng, std::size_t max_len) {
    std::size_t const len = 1 + rng.index(max_len);
    std::vector<corpus::TokenId> words(len);
    for (auto& w : words) {
        w = static_cast<corpus::TokenId>(corpus::Vocabulary::kReserved + rng.index(kVocab - corpus::Vocabulary::kReserved));
    }
    return words;
}

nn::GradCheckResult check_attr(std::uint64_t seed) {
    Rng rng(seed);
    auto model = attributes::make_attr_model<double>(6, 5, kAttributes);
    model.params.init_uniform(rng);
    std::vector<attributes::AttrSample> samples(3);
    for (auto& s : samples) {
        s.input = random_feature(rng, 6);
        s.target.resize(kAttributes);
        for (auto& t : s.target) {
            t = rng.uniform() < 0.5 ? 1.0f : 0.0f;
        }
    }
    auto loss = [&](nn::ParamStore<double>&, bool with_grad) {
        return attributes::attr_loss(model, std::span<attributes::AttrSample const>(samples), with_grad);
    };
    return nn::finite_diff_check(loss, model.params, {.seed = seed});
}

nn::GradCheckResult check_vqa(std::uint64_t seed) {
    Rng rng(seed);
    auto model = vqa::make_vqa_model<double>(kVocab, 4, 3, kFeature, kAttributes);
    model.params.init_uniform(rng);
    std::vector<vqa::VqaSample> samples(3);
    for (auto& s : samples) {
        s.words = random_words(rng, 4);
        s.feature = random_feature(rng, kFeature);
        s.answer = rng.index(kAttributes);
    }
    std::vector<std::size_t> ids(samples.size());
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    auto loss = [&](nn::ParamStore<double>&, bool with_grad) {
        return vqa::vqa_loss(model, std::span<vqa::VqaSample const>(samples), ids, with_grad);
    };
    return nn::finite_diff_check(loss, model.params, {.seed = seed});
}

nn::GradCheckResult check_qgen(qgen::QGenMode mode, std::uint64_t seed) {
    Rng rng(seed);
    qgen::QGenHyper dims;
    dims.embed = 4;
    dims.hidden = 3;
    dims.layers = 2;
    dims.att_dim = 3;
    auto model = qgen::make_qgen_model<double>(mode, kVocab, kFeature, kAttributes, dims);
    model.params.init_uniform(rng);
    std::vector<qgen::QGenSample> samples(3);
    for (auto& s : samples) {
        s.feature = random_feature(rng, kFeature);
        if (mode == qgen::QGenMode::conditioned) {
            s.attribute = rng.index(kAttributes);
        }
        s.words = random_words(rng, 4);
    }
    std::vector<std::size_t> ids(samples.size());
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    auto loss = [&](nn::ParamStore<double>&, bool with_grad) {
        return qgen::qgen_loss(model, std::span<qgen::QGenSample const>(samples), ids, with_grad);
    };
    return nn::finite_diff_check(loss, model.params, {.seed = seed});
}

}  // namespace

std::vector<ModelGradCheck> run_gradchecks(std::uint64_t seed) {
    return {
        {"attr", check_attr(seed)},
        {"vqa", check_vqa(seed + 1)},
        {"qgen_conditioned", check_qgen(qgen::QGenMode::conditioned, seed + 2)},
        {"qgen_baseline", check_qgen(qgen::QGenMode::baseline, seed + 3)},
    };
}

}  // namespace discrimq::app
