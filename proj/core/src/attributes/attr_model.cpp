#include "discrimq/attributes/attr_model.hpp"

#include <algorithm>
#include <numeric>
#include <utility>

#include "discrimq/errors.hpp"
#include "discrimq/nn/checkpoint.hpp"
#include "discrimq/nn/loss.hpp"
#include "discrimq/rng.hpp"

namespace discrimq::attributes {

namespace {

template <typename T>
std::vector<T> to_t(std::span<float const> v) {
    return std::vector<T>(v.begin(), v.end());
}

template <typename T>
void require_input(AttrModel<T> const& model, std::size_t got) {
    if (got != model.input_dim) {
        throw ShapeError("attribute model expects input of length " + std::to_string(model.input_dim) + ", got " +
                         std::to_string(got));
    }
}

}  // namespace

AttrHyper default_attr_hyper(corpus::Profile profile) {
    AttrHyper h;
    h.hidden = profile == corpus::Profile::real ? 512 : 64;
    return h;
}

std::vector<AttrSample> make_attr_samples(std::span<corpus::RegionRecord const* const> regions,
                                          AttributeVocab const& vocab) {
    std::vector<AttrSample> out;
    out.reserve(regions.size());
    for (auto const* r : regions) {
        out.push_back({corpus::region_representation(*r), label_region(*r, vocab)});
    }
    return out;
}

template <typename T>
AttrModel<T> make_attr_model(std::size_t input_dim, std::size_t hidden, std::size_t num_attributes) {
    AttrModel<T> m;
    m.input_dim = input_dim;
    m.hidden_dim = hidden;
    m.num_attributes = num_attributes;
    m.layers.push_back(nn::add_dense_layer(m.params, "attr.hidden", input_dim, hidden, nn::Activation::tanh));
    m.layers.push_back(nn::add_dense_layer(m.params, "attr.out", hidden, num_attributes, nn::Activation::sigmoid));
    return m;
}

template <typename T>
T attr_loss(AttrModel<T>& model, std::span<AttrSample const> batch, bool with_grad) {
    if (batch.empty()) {
        return T{0};
    }
    T const scale = T{1} / static_cast<T>(batch.size());
    T total{0};
    for (auto const& s : batch) {
        require_input(model, s.input.size());
        auto const x = to_t<T>(s.input);
        auto const target = to_t<T>(s.target);
        nn::MlpCache<T> cache;
        auto const scores = nn::mlp_forward<T>(x, model.params, model.layers, with_grad ? &cache : nullptr);
        total += nn::loss_multilabel<T>(scores, target);
        if (with_grad) {
            auto grad = nn::multilabel_logit_grad<T>(scores, target);
            for (auto& g : grad) {
                g *= scale;
            }
            nn::mlp_backward<T>(cache, grad, nn::GradientAt::pre_activation, model.params, model.layers);
        }
    }
    return total * scale;
}

AttrModel<float> train_attr_model(std::span<AttrSample const> samples, std::size_t input_dim,
                                  std::size_t num_attributes, AttrHyper const& hyper,
                                  std::vector<double>* epoch_losses) {
    if (samples.empty()) {
        throw DataError("no labeled regions to train the attribute model");
    }
    Rng rng(hyper.seed);
    auto model = make_attr_model<float>(input_dim, hyper.hidden, num_attributes);
    model.params.init_uniform(rng);
    std::vector<AttrSample> batch;
    auto losses = nn::run_minibatch_training(model.params, samples.size(), hyper.schedule, rng,
                                             [&](std::span<std::size_t const> ids) {
                                                 batch.clear();
                                                 for (std::size_t id : ids) {
                                                     batch.push_back(samples[id]);
                                                 }
                                                 return static_cast<double>(attr_loss<float>(model, batch, true));
                                             });
    if (epoch_losses != nullptr) {
        *epoch_losses = std::move(losses);
    }
    return model;
}

template <typename T>
std::vector<T> predict_attributes(AttrModel<T> const& model, std::span<float const> input) {
    require_input(model, input.size());
    auto const x = to_t<T>(input);
    return nn::mlp_forward<T>(x, model.params, model.layers);
}

std::vector<float> predict_attributes(AttrModel<float> const& model, corpus::RegionRecord const& region) {
    auto const x = corpus::region_representation(region);
    return predict_attributes<float>(model, x);
}

double visual_similarity(AttrModel<float> const& model, std::size_t i, std::size_t j) {
    auto const& w = model.w_f();
    if (i >= w.rows() || j >= w.rows()) {
        throw IndexError("attribute index (" + std::to_string(i) + ", " + std::to_string(j) + ") out of range for K=" +
                         std::to_string(w.rows()));
    }
    double s = 0.0;
    for (std::size_t c = 0; c < w.cols(); ++c) {
        s += static_cast<double>(w(i, c)) * static_cast<double>(w(j, c));
    }
    return s;
}

SimilarityMatrix visual_similarity_matrix(AttrModel<float> const& model, bool cosine) {
    return SimilarityMatrix::from_rows(model.w_f(), cosine);
}

double mean_average_precision(std::span<std::vector<float> const> scores, std::span<std::vector<float> const> labels) {
    if (scores.size() != labels.size()) {
        throw ShapeError("score and label lists differ in length");
    }
    if (scores.empty()) {
        return 0.0;
    }
    std::size_t const k = labels.front().size();
    double sum_ap = 0.0;
    std::size_t counted = 0;
    std::vector<std::size_t> order(scores.size());
    for (std::size_t a = 0; a < k; ++a) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t x, std::size_t y) { return scores[x][a] > scores[y][a]; });
        std::size_t hits = 0;
        double ap = 0.0;
        for (std::size_t rank = 0; rank < order.size(); ++rank) {
            if (labels[order[rank]][a] > 0.5f) {
                ++hits;
                ap += static_cast<double>(hits) / static_cast<double>(rank + 1);
            }
        }
        if (hits > 0) {
            sum_ap += ap / static_cast<double>(hits);
            ++counted;
        }
    }
    return counted == 0 ? 0.0 : sum_ap / static_cast<double>(counted);
}

void save_attr_model(std::filesystem::path const& path, AttrModel<float> const& model) {
    nlohmann::json meta{{"model", "attr"},
                        {"input_dim", model.input_dim},
                        {"hidden", model.hidden_dim},
                        {"num_attributes", model.num_attributes}};
    nn::save_checkpoint(path, model.params, meta);
}

AttrModel<float> load_attr_model(std::filesystem::path const& path) {
    auto ck = nn::load_checkpoint<float>(path);
    if (ck.meta.value("model", "") != "attr") {
        throw SchemaError(path.string() + " is not an attribute model checkpoint");
    }
    auto model = make_attr_model<float>(ck.meta.at("input_dim").get<std::size_t>(), ck.meta.at("hidden").get<std::size_t>(),
                                        ck.meta.at("num_attributes").get<std::size_t>());
    nn::assign_params(model.params, ck.params);
    return model;
}

#define DISCRIMQ_INSTANTIATE(T)                                                                           \
    template AttrModel<T> make_attr_model<T>(std::size_t, std::size_t, std::size_t);                      \
    template T attr_loss<T>(AttrModel<T>&, std::span<AttrSample const>, bool);                           \
    template std::vector<T> predict_attributes<T>(AttrModel<T> const&, std::span<float const>);
DISCRIMQ_INSTANTIATE(float)
DISCRIMQ_INSTANTIATE(double)
#undef DISCRIMQ_INSTANTIATE

}  // namespace discrimq::attributes
