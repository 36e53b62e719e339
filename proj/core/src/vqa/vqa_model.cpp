#include "discrimq/vqa/vqa_model.hpp"

#include <algorithm>
#include <cmath>

#include "discrimq/corpus/tokenizer.hpp"
#include "discrimq/errors.hpp"
#include "discrimq/nn/checkpoint.hpp"
#include "discrimq/nn/loss.hpp"
#include "discrimq/rng.hpp"

namespace discrimq::vqa {

namespace {

template <typename T>
struct Encoding {
    std::vector<nn::LstmCache<T>> caches;
    nn::LstmState<T> state;
};

template <typename T>
Encoding<T> encode_question(VqaModel<T> const& model, std::span<corpus::TokenId const> words, bool keep_cache) {
    Encoding<T> enc;
    enc.state = nn::LstmState<T>::zeros(model.lstm.hidden_dim);
    auto const& table = model.params.value(model.embed);
    for (corpus::TokenId w : words) {
        if (w >= table.rows()) {
            throw IndexError("token id " + std::to_string(w) + " outside the VQA vocabulary");
        }
        nn::LstmCache<T>* cache = nullptr;
        if (keep_cache) {
            enc.caches.emplace_back();
            cache = &enc.caches.back();
        }
        enc.state = nn::lstm_step<T>(table.row(w), enc.state, model.params, model.lstm, cache);
    }
    return enc;
}

template <typename T>
std::vector<T> logits_from(VqaModel<T> const& model, std::vector<T> const& h, std::span<float const> feature) {
    if (feature.size() != model.feature_dim) {
        throw ShapeError("VQA model expects a feature of length " + std::to_string(model.feature_dim) + ", got " +
                         std::to_string(feature.size()));
    }
    auto const b = model.params.value(model.bias).data();
    std::vector<T> logits(b.begin(), b.end());
    std::vector<T> const f(feature.begin(), feature.end());
    nn::gemv_acc<T>(model.params.value(model.w_q), h, logits, "vqa.w_q");
    nn::gemv_acc<T>(model.params.value(model.w_v), f, logits, "vqa.w_v");
    return logits;
}

}  // namespace

VqaHyper default_vqa_hyper(corpus::Profile profile) {
    VqaHyper h;
    if (profile == corpus::Profile::real) {
        h.embed = 300;
        h.hidden = 512;
    }
    return h;
}

VqaData make_vqa_samples(std::span<corpus::RegionRecord const* const> regions, corpus::Vocabulary const& vocab,
                         attributes::AttributeVocab const& attrs, std::size_t max_len) {
    VqaData data;
    for (auto const* r : regions) {
        auto const feature = corpus::region_representation(*r);
        for (auto const& qa : r->questions) {
            auto const answer = attrs.find(corpus::tokenize(qa.answer));
            auto words = corpus::tokenize(qa.text);
            if (!answer || words.empty()) {
                ++data.dropped;
                continue;
            }
            if (words.size() > max_len) {
                words.resize(max_len);
            }
            data.samples.push_back({vocab.encode(words), feature, *answer});
        }
    }
    return data;
}

template <typename T>
VqaModel<T> make_vqa_model(std::size_t vocab_size, std::size_t embed, std::size_t hidden, std::size_t feature_dim,
                           std::size_t num_answers) {
    VqaModel<T> m;
    m.vocab_size = vocab_size;
    m.feature_dim = feature_dim;
    m.num_answers = num_answers;
    m.embed = m.params.add("vqa.embed", vocab_size, embed);
    m.lstm = nn::add_lstm_layer(m.params, "vqa.lstm", embed, hidden);
    m.w_q = m.params.add("vqa.w_q", num_answers, hidden);
    m.w_v = m.params.add("vqa.w_v", num_answers, feature_dim);
    m.bias = m.params.add("vqa.bias", num_answers, 1);
    return m;
}

template <typename T>
T vqa_loss(VqaModel<T>& model, std::span<VqaSample const> samples, std::span<std::size_t const> ids,
           bool with_grad) {
    if (ids.empty()) {
        return T{0};
    }
    T const scale = T{1} / static_cast<T>(ids.size());
    std::size_t const hd = model.lstm.hidden_dim;
    T total{0};
    for (std::size_t id : ids) {
        auto const& s = samples[id];
        auto enc = encode_question(model, s.words, with_grad);
        auto const logits = logits_from(model, enc.state.h, s.feature);
        total += nn::loss_categorical<T>(logits, s.answer);
        if (!with_grad) {
            continue;
        }
        auto dlogits = nn::categorical_logit_grad<T>(logits, s.answer);
        for (auto& g : dlogits) {
            g *= scale;
        }
        std::vector<T> const f(s.feature.begin(), s.feature.end());
        nn::outer_acc<T>(model.params.grad(model.w_q), dlogits, enc.state.h, "vqa.w_q");
        nn::outer_acc<T>(model.params.grad(model.w_v), dlogits, f, "vqa.w_v");
        auto db = model.params.grad(model.bias).data();
        for (std::size_t k = 0; k < db.size(); ++k) {
            db[k] += dlogits[k];
        }
        std::vector<T> dh(hd);
        std::vector<T> dc(hd);
        nn::gemv_t_acc<T>(model.params.value(model.w_q), dlogits, dh, "vqa.w_q");
        auto& embed_grad = model.params.grad(model.embed);
        for (std::size_t t = enc.caches.size(); t-- > 0;) {
            auto g = nn::lstm_step_backward<T>(enc.caches[t], dh, dc, model.params, model.lstm);
            auto row = embed_grad.row(s.words[t]);
            for (std::size_t k = 0; k < row.size(); ++k) {
                row[k] += g.dx[k];
            }
            dh = std::move(g.dh_prev);
            dc = std::move(g.dc_prev);
        }
    }
    return total * scale;
}

VqaModel<float> train_vqa(std::span<VqaSample const> samples, std::size_t vocab_size, std::size_t feature_dim,
                          std::size_t num_answers, VqaHyper const& hyper, std::vector<double>* epoch_losses) {
    if (samples.empty()) {
        throw DataError("no question-answer pair has an answer in the attribute vocabulary");
    }
    Rng rng(hyper.seed);
    auto model = make_vqa_model<float>(vocab_size, hyper.embed, hyper.hidden, feature_dim, num_answers);
    model.params.init_uniform(rng);
    auto losses = nn::run_minibatch_training(model.params, samples.size(), hyper.schedule, rng,
                                             [&](std::span<std::size_t const> ids) {
                                                 return static_cast<double>(vqa_loss<float>(model, samples, ids, true));
                                             });
    if (epoch_losses != nullptr) {
        *epoch_losses = std::move(losses);
    }
    return model;
}

template <typename T>
std::vector<T> answer_logits(VqaModel<T> const& model, std::span<corpus::TokenId const> words,
                             std::span<float const> feature) {
    auto const enc = encode_question(model, words, false);
    return logits_from(model, enc.state.h, feature);
}

Answer predict_answer(VqaModel<float> const& model, std::span<corpus::TokenId const> words,
                      std::span<float const> feature) {
    if (words.empty()) {
        throw InputError("cannot answer an empty question");
    }
    auto const logits = answer_logits(model, words, feature);
    auto const logp = nn::log_softmax<float>(logits);
    std::size_t best = 0;
    for (std::size_t k = 1; k < logp.size(); ++k) {
        if (logp[k] > logp[best]) {
            best = k;
        }
    }
    return {best, std::exp(static_cast<double>(logp[best]))};
}

double answer_accuracy(VqaModel<float> const& model, std::span<VqaSample const> samples) {
    if (samples.empty()) {
        return 0.0;
    }
    std::size_t correct = 0;
    for (auto const& s : samples) {
        if (!s.words.empty() && predict_answer(model, s.words, s.feature).index == s.answer) {
            ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(samples.size());
}

double question_similarity(VqaModel<float> const& model, std::size_t i, std::size_t j) {
    auto const& w = model.w_q_matrix();
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

SimilarityMatrix question_similarity_matrix(VqaModel<float> const& model, bool cosine) {
    return SimilarityMatrix::from_rows(model.w_q_matrix(), cosine);
}

void save_vqa_model(std::filesystem::path const& path, VqaModel<float> const& model) {
    nlohmann::json meta{{"model", "vqa"},
                        {"vocab_size", model.vocab_size},
                        {"embed", model.params.value(model.embed).cols()},
                        {"hidden", model.lstm.hidden_dim},
                        {"feature_dim", model.feature_dim},
                        {"num_answers", model.num_answers}};
    nn::save_checkpoint(path, model.params, meta);
}

VqaModel<float> load_vqa_model(std::filesystem::path const& path) {
    auto ck = nn::load_checkpoint<float>(path);
    if (ck.meta.value("model", "") != "vqa") {
        throw SchemaError(path.string() + " is not a VQA model checkpoint");
    }
    auto const& m = ck.meta;
    auto model = make_vqa_model<float>(m.at("vocab_size").get<std::size_t>(), m.at("embed").get<std::size_t>(),
                                       m.at("hidden").get<std::size_t>(), m.at("feature_dim").get<std::size_t>(),
                                       m.at("num_answers").get<std::size_t>());
    nn::assign_params(model.params, ck.params);
    return model;
}

#define DISCRIMQ_INSTANTIATE(T)                                                                               \
    template VqaModel<T> make_vqa_model<T>(std::size_t, std::size_t, std::size_t, std::size_t, std::size_t);  \
    template T vqa_loss<T>(VqaModel<T>&, std::span<VqaSample const>, std::span<std::size_t const>, bool);     \
    template std::vector<T> answer_logits<T>(VqaModel<T> const&, std::span<corpus::TokenId const>,            \
                                             std::span<float const>);
DISCRIMQ_INSTANTIATE(float)
DISCRIMQ_INSTANTIATE(double)
#undef DISCRIMQ_INSTANTIATE

}  // namespace discrimq::vqa
