#include "discrimq/qgen/qgen_model.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "discrimq/corpus/tokenizer.hpp"
#include "discrimq/errors.hpp"
#include "discrimq/nn/checkpoint.hpp"
#include "discrimq/nn/loss.hpp"
#include "discrimq/rng.hpp"

namespace discrimq::qgen {

namespace {

using corpus::TokenId;
using corpus::Vocabulary;

template <typename T>
struct SequenceCache {
    std::vector<std::vector<nn::LstmCache<T>>> steps;  // [step][layer]
    std::vector<std::vector<T>> tops;                  // top hidden state per prediction
};

template <typename T>
std::size_t context_steps(QGenModel<T> const& model) {
    return model.conditioned() ? 2 : 1;
}

template <typename T>
void check_context(QGenModel<T> const& model, QGenContext const& ctx) {
    if (ctx.feature.size() != model.feature_dim) {
        throw ShapeError("qgen.img_proj: feature length " + std::to_string(ctx.feature.size()) + " does not match " +
                         std::to_string(model.feature_dim));
    }
    if (model.conditioned()) {
        if (!ctx.attribute) {
            throw InputError("a conditioned generator needs an attribute");
        }
        if (*ctx.attribute >= model.num_attributes) {
            throw IndexError("attribute index " + std::to_string(*ctx.attribute) + " out of range for K=" +
                             std::to_string(model.num_attributes));
        }
    }
}

template <typename T>
std::vector<T> image_input(QGenModel<T> const& model, std::span<float const> feature) {
    auto const b = model.params.value(model.img_bias).data();
    std::vector<T> x(b.begin(), b.end());
    std::vector<T> const f(feature.begin(), feature.end());
    nn::gemv_acc<T>(model.params.value(model.img_proj), f, x, "qgen.img_proj");
    return x;
}

template <typename T>
std::vector<T> attribute_input(QGenModel<T> const& model, std::size_t attribute) {
    auto const& proj = model.params.value(model.att_proj);
    std::vector<T> x(proj.rows(), T{0});
    nn::gemv_acc<T>(proj, model.params.value(model.att_table).row(attribute), x, "qgen.att_proj");
    return x;
}

template <typename T>
std::span<T const> word_input(QGenModel<T> const& model, TokenId token) {
    auto const& table = model.params.value(model.embed);
    if (token >= table.rows()) {
        throw IndexError("token id " + std::to_string(token) + " outside the generator vocabulary of " +
                         std::to_string(table.rows()));
    }
    return table.row(token);
}

template <typename T>
void feed(QGenModel<T> const& model, std::vector<nn::LstmState<T>>& layers, std::span<T const> x,
          std::vector<nn::LstmCache<T>>* caches) {
    std::vector<T> input(x.begin(), x.end());
    for (std::size_t l = 0; l < model.lstm.size(); ++l) {
        nn::LstmCache<T>* cache = caches != nullptr ? &(*caches)[l] : nullptr;
        layers[l] = nn::lstm_step<T>(input, layers[l], model.params, model.lstm[l], cache);
        input = layers[l].h;
    }
}

template <typename T>
std::vector<T> output_logits(QGenModel<T> const& model, std::vector<T> const& h) {
    auto const b = model.params.value(model.out_b).data();
    std::vector<T> logits(b.begin(), b.end());
    nn::gemv_acc<T>(model.params.value(model.out_w), h, logits, "qgen.out_w");
    return logits;
}

template <typename T>
std::vector<nn::LstmState<T>> zero_states(QGenModel<T> const& model) {
    std::vector<nn::LstmState<T>> layers;
    for (auto const& l : model.lstm) {
        layers.push_back(nn::LstmState<T>::zeros(l.hidden_dim));
    }
    return layers;
}

// Logits after the begin marker and after each word.
template <typename T>
std::vector<std::vector<T>> forward_sequence(QGenModel<T> const& model, QGenContext const& ctx,
                                             std::span<TokenId const> words, SequenceCache<T>* cache) {
    check_context(model, ctx);
    std::size_t const n_ctx = context_steps(model);
    std::size_t const n_steps = n_ctx + 1 + words.size();
    if (cache != nullptr) {
        cache->steps.assign(n_steps, std::vector<nn::LstmCache<T>>(model.lstm.size()));
        cache->tops.clear();
    }
    auto layers = zero_states(model);
    std::vector<std::vector<T>> logits;
    for (std::size_t s = 0; s < n_steps; ++s) {
        std::vector<T> x;
        if (s == 0) {
            x = image_input(model, ctx.feature);
        } else if (s == 1 && model.conditioned()) {
            x = attribute_input(model, *ctx.attribute);
        } else {
            TokenId const token = s == n_ctx ? Vocabulary::kBegin : words[s - n_ctx - 1];
            auto const e = word_input(model, token);
            x.assign(e.begin(), e.end());
        }
        feed<T>(model, layers, x, cache != nullptr ? &cache->steps[s] : nullptr);
        if (s >= n_ctx) {
            logits.push_back(output_logits(model, layers.back().h));
            if (cache != nullptr) {
                cache->tops.push_back(layers.back().h);
            }
        }
    }
    return logits;
}

template <typename T>
void backward_sequence(QGenModel<T>& model, QGenContext const& ctx, std::span<TokenId const> words,
                       SequenceCache<T> const& cache, std::vector<std::vector<T>> const& dlogits) {
    auto& store = model.params;
    std::size_t const n_ctx = context_steps(model);
    std::size_t const n_layers = model.lstm.size();
    std::vector<std::vector<T>> carry_h;
    std::vector<std::vector<T>> carry_c;
    for (auto const& l : model.lstm) {
        carry_h.emplace_back(l.hidden_dim, T{0});
        carry_c.emplace_back(l.hidden_dim, T{0});
    }
    auto& out_w_grad = store.grad(model.out_w);
    auto out_b_grad = store.grad(model.out_b).data();
    auto const& out_w = store.value(model.out_w);

    for (std::size_t s = cache.steps.size(); s-- > 0;) {
        std::vector<T> from_above(model.hidden_dim(), T{0});
        if (s >= n_ctx) {
            std::size_t const p = s - n_ctx;
            nn::outer_acc<T>(out_w_grad, dlogits[p], cache.tops[p], "qgen.out_w");
            for (std::size_t k = 0; k < out_b_grad.size(); ++k) {
                out_b_grad[k] += dlogits[p][k];
            }
            nn::gemv_t_acc<T>(out_w, dlogits[p], from_above, "qgen.out_w");
        }
        for (std::size_t l = n_layers; l-- > 0;) {
            std::vector<T> dh = carry_h[l];
            for (std::size_t k = 0; k < dh.size(); ++k) {
                dh[k] += from_above[k];
            }
            auto g = nn::lstm_step_backward<T>(cache.steps[s][l], dh, carry_c[l], store, model.lstm[l]);
            carry_h[l] = std::move(g.dh_prev);
            carry_c[l] = std::move(g.dc_prev);
            from_above = std::move(g.dx);
        }
        auto const& dx = from_above;
        if (s == 0) {
            std::vector<T> const f(ctx.feature.begin(), ctx.feature.end());
            nn::outer_acc<T>(store.grad(model.img_proj), dx, f, "qgen.img_proj");
            auto db = store.grad(model.img_bias).data();
            for (std::size_t k = 0; k < db.size(); ++k) {
                db[k] += dx[k];
            }
        } else if (s == 1 && model.conditioned()) {
            auto const sigma = store.value(model.att_table).row(*ctx.attribute);
            nn::outer_acc<T>(store.grad(model.att_proj), dx, sigma, "qgen.att_proj");
            auto const& entry = store.entries()[model.att_table.index];
            if (entry.trainable) {
                auto row = store.grad(model.att_table).row(*ctx.attribute);
                nn::gemv_t_acc<T>(store.value(model.att_proj), dx, row, "qgen.att_proj");
            }
        } else {
            TokenId const token = s == n_ctx ? Vocabulary::kBegin : words[s - n_ctx - 1];
            auto row = store.grad(model.embed).row(token);
            for (std::size_t k = 0; k < row.size(); ++k) {
                row[k] += dx[k];
            }
        }
    }
}

}  // namespace

std::string mode_name(QGenMode mode) {
    return mode == QGenMode::conditioned ? "conditioned" : "baseline";
}

QGenHyper default_qgen_hyper(corpus::Profile profile) {
    QGenHyper h;
    if (profile == corpus::Profile::real) {
        h.embed = 512;
        h.hidden = 512;
    }
    return h;
}

QGenData make_qgen_samples(std::span<corpus::RegionRecord const* const> regions, Vocabulary const& vocab,
                           attributes::AttributeVocab const& attrs, QGenMode mode, std::size_t max_len) {
    QGenData data;
    for (auto const* r : regions) {
        auto const feature = corpus::region_representation(*r);
        for (auto const& qa : r->questions) {
            auto words = corpus::tokenize(qa.text);
            std::optional<std::size_t> attribute;
            if (mode == QGenMode::conditioned) {
                attribute = attrs.find(corpus::tokenize(qa.answer));
                if (!attribute) {
                    ++data.dropped;
                    continue;
                }
            }
            if (words.empty()) {
                ++data.dropped;
                continue;
            }
            if (words.size() > max_len) {
                words.resize(max_len);
            }
            data.samples.push_back({feature, attribute, vocab.encode(words)});
        }
    }
    return data;
}

template <typename T>
QGenModel<T> make_qgen_model(QGenMode mode, std::size_t vocab_size, std::size_t feature_dim,
                             std::size_t num_attributes, QGenHyper const& dims) {
    if (dims.layers == 0) {
        throw ConfigError("generator needs at least one LSTM layer");
    }
    QGenModel<T> m;
    m.mode = mode;
    m.vocab_size = vocab_size;
    m.feature_dim = feature_dim;
    m.num_attributes = mode == QGenMode::conditioned ? num_attributes : 0;
    m.embed = m.params.add("qgen.embed", vocab_size, dims.embed);
    m.img_proj = m.params.add("qgen.img_proj", dims.embed, feature_dim);
    m.img_bias = m.params.add("qgen.img_bias", dims.embed, 1);
    if (mode == QGenMode::conditioned) {
        m.att_table = m.params.add("qgen.att_table", num_attributes, dims.att_dim);
        m.att_proj = m.params.add("qgen.att_proj", dims.embed, dims.att_dim);
    }
    for (std::size_t l = 0; l < dims.layers; ++l) {
        m.lstm.push_back(nn::add_lstm_layer(m.params, "qgen.lstm" + std::to_string(l), l == 0 ? dims.embed : dims.hidden,
                                            dims.hidden));
    }
    m.out_w = m.params.add("qgen.out_w", vocab_size, dims.hidden);
    m.out_b = m.params.add("qgen.out_b", vocab_size, 1);
    return m;
}

template <typename T>
void set_pretrained_attribute_embeddings(QGenModel<T>& model, nn::Tensor<T> const& table) {
    if (!model.conditioned()) {
        throw StateError("baseline generators have no attribute embedding");
    }
    auto& target = model.params.value(model.att_table);
    if (table.rows() != target.rows() || table.cols() != target.cols()) {
        throw ShapeError("qgen.att_table: pretrained table is " + std::to_string(table.rows()) + "x" +
                         std::to_string(table.cols()) + ", model expects " + std::to_string(target.rows()) + "x" +
                         std::to_string(target.cols()));
    }
    target = table;
    model.params.set_trainable(model.att_table, false);
}

nn::Tensor<float> load_attribute_embeddings(std::filesystem::path const& path,
                                            attributes::AttributeVocab const& attrs) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open embedding file " + path.string());
    }
    std::map<std::string, std::vector<float>> vectors;
    std::size_t dim = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string token;
        if (!(ls >> token)) {
            continue;
        }
        std::vector<float> v;
        float x = 0.0f;
        while (ls >> x) {
            v.push_back(x);
        }
        if (line_no == 1 && v.size() == 1) {
            continue;  // "count dim" header
        }
        if (dim == 0) {
            dim = v.size();
        }
        if (v.size() != dim || dim == 0) {
            throw ParseError(path.string() + " line " + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                             " components");
        }
        vectors.emplace(token, std::move(v));
    }
    nn::Tensor<float> table(attrs.size(), dim);
    for (std::size_t k = 0; k < attrs.size(); ++k) {
        std::size_t found = 0;
        for (auto const& t : attrs.entry(k).tokens) {
            auto it = vectors.find(t);
            if (it == vectors.end()) {
                continue;
            }
            ++found;
            for (std::size_t d = 0; d < dim; ++d) {
                table(k, d) += it->second[d];
            }
        }
        if (found == 0) {
            throw DataError("no embedding for any token of attribute '" + attrs.expression(k) + "'");
        }
        for (std::size_t d = 0; d < dim; ++d) {
            table(k, d) /= static_cast<float>(found);
        }
    }
    return table;
}

template <typename T>
std::vector<std::vector<T>> teacher_forced_log_probs(QGenModel<T> const& model, QGenContext const& ctx,
                                                     std::span<TokenId const> words) {
    auto logits = forward_sequence<T>(model, ctx, words, nullptr);
    for (auto& l : logits) {
        l = nn::log_softmax<T>(l);
    }
    return logits;
}

template <typename T>
T qgen_loss(QGenModel<T>& model, std::span<QGenSample const> samples, std::span<std::size_t const> ids,
            bool with_grad) {
    if (ids.empty()) {
        return T{0};
    }
    T const scale = T{1} / static_cast<T>(ids.size());
    T total{0};
    SequenceCache<T> cache;
    for (std::size_t id : ids) {
        auto const& s = samples[id];
        QGenContext const ctx{s.feature, s.attribute};
        auto const logits = forward_sequence<T>(model, ctx, s.words, with_grad ? &cache : nullptr);
        std::vector<std::vector<T>> dlogits;
        for (std::size_t p = 0; p < logits.size(); ++p) {
            TokenId const target = p < s.words.size() ? s.words[p] : Vocabulary::kEnd;
            total += nn::loss_categorical<T>(logits[p], target);
            if (with_grad) {
                auto d = nn::categorical_logit_grad<T>(logits[p], target);
                for (auto& g : d) {
                    g *= scale;
                }
                dlogits.push_back(std::move(d));
            }
        }
        if (with_grad) {
            backward_sequence<T>(model, ctx, s.words, cache, dlogits);
        }
    }
    return total * scale;
}

QGenModel<float> train_qgen(std::span<QGenSample const> samples, QGenMode mode, std::size_t vocab_size,
                            std::size_t feature_dim, std::size_t num_attributes, QGenHyper const& hyper,
                            std::optional<nn::Tensor<float>> const& pretrained, std::vector<double>* epoch_losses) {
    if (samples.empty()) {
        throw DataError("no training tuples for the question generator");
    }
    QGenHyper dims = hyper;
    if (pretrained && mode == QGenMode::conditioned) {
        dims.att_dim = pretrained->cols();
    }
    Rng rng(hyper.seed);
    auto model = make_qgen_model<float>(mode, vocab_size, feature_dim, num_attributes, dims);
    model.params.init_uniform(rng);
    if (pretrained && mode == QGenMode::conditioned) {
        set_pretrained_attribute_embeddings(model, *pretrained);
    }
    auto losses = nn::run_minibatch_training(model.params, samples.size(), hyper.schedule, rng,
                                             [&](std::span<std::size_t const> ids) {
                                                 return static_cast<double>(qgen_loss<float>(model, samples, ids, true));
                                             });
    if (epoch_losses != nullptr) {
        *epoch_losses = std::move(losses);
    }
    return model;
}

double perplexity(QGenModel<float> const& model, std::span<QGenSample const> samples) {
    double nll = 0.0;
    std::size_t tokens = 0;
    for (auto const& s : samples) {
        auto const logp = teacher_forced_log_probs<float>(model, {s.feature, s.attribute}, s.words);
        for (std::size_t p = 0; p < logp.size(); ++p) {
            TokenId const target = p < s.words.size() ? s.words[p] : Vocabulary::kEnd;
            nll -= static_cast<double>(logp[p][target]);
            ++tokens;
        }
    }
    return tokens == 0 ? 1.0 : std::exp(nll / static_cast<double>(tokens));
}

template <typename T>
DecoderState<T> start_decoder(QGenModel<T> const& model, QGenContext const& ctx) {
    check_context(model, ctx);
    DecoderState<T> state{zero_states(model)};
    feed<T>(model, state.layers, image_input(model, ctx.feature), nullptr);
    if (model.conditioned()) {
        feed<T>(model, state.layers, attribute_input(model, *ctx.attribute), nullptr);
    }
    feed<T>(model, state.layers, word_input(model, Vocabulary::kBegin), nullptr);
    return state;
}

template <typename T>
DecoderState<T> advance_decoder(QGenModel<T> const& model, DecoderState<T> const& state, TokenId token) {
    DecoderState<T> next = state;
    feed<T>(model, next.layers, word_input(model, token), nullptr);
    return next;
}

template <typename T>
std::vector<T> next_log_probs(QGenModel<T> const& model, DecoderState<T> const& state) {
    return nn::log_softmax<T>(output_logits(model, state.layers.back().h));
}

void save_qgen_model(std::filesystem::path const& path, QGenModel<float> const& model) {
    auto const& p = model.params;
    nlohmann::json meta{{"model", "qgen"},
                        {"mode", mode_name(model.mode)},
                        {"vocab_size", model.vocab_size},
                        {"feature_dim", model.feature_dim},
                        {"num_attributes", model.num_attributes},
                        {"embed", p.value(model.embed).cols()},
                        {"hidden", model.hidden_dim()},
                        {"layers", model.lstm.size()},
                        {"att_dim", model.conditioned() ? p.value(model.att_table).cols() : 0},
                        {"frozen_attributes",
                         model.conditioned() && !p.entries()[model.att_table.index].trainable}};
    nn::save_checkpoint(path, model.params, meta);
}

QGenModel<float> load_qgen_model(std::filesystem::path const& path) {
    auto ck = nn::load_checkpoint<float>(path);
    auto const& m = ck.meta;
    if (m.value("model", "") != "qgen") {
        throw SchemaError(path.string() + " is not a question generator checkpoint");
    }
    QGenHyper dims;
    dims.embed = m.at("embed").get<std::size_t>();
    dims.hidden = m.at("hidden").get<std::size_t>();
    dims.layers = m.at("layers").get<std::size_t>();
    dims.att_dim = m.at("att_dim").get<std::size_t>();
    QGenMode const mode = m.at("mode").get<std::string>() == "baseline" ? QGenMode::baseline : QGenMode::conditioned;
    auto model = make_qgen_model<float>(mode, m.at("vocab_size").get<std::size_t>(),
                                        m.at("feature_dim").get<std::size_t>(),
                                        m.at("num_attributes").get<std::size_t>(), dims);
    nn::assign_params(model.params, ck.params);
    if (model.conditioned() && m.value("frozen_attributes", false)) {
        model.params.set_trainable(model.att_table, false);
    }
    return model;
}

#define DISCRIMQ_INSTANTIATE(T)                                                                                   \
    template QGenModel<T> make_qgen_model<T>(QGenMode, std::size_t, std::size_t, std::size_t, QGenHyper const&);  \
    template void set_pretrained_attribute_embeddings<T>(QGenModel<T>&, nn::Tensor<T> const&);                    \
    template std::vector<std::vector<T>> teacher_forced_log_probs<T>(QGenModel<T> const&, QGenContext const&,     \
                                                                     std::span<TokenId const>);                   \
    template T qgen_loss<T>(QGenModel<T>&, std::span<QGenSample const>, std::span<std::size_t const>, bool);      \
    template DecoderState<T> start_decoder<T>(QGenModel<T> const&, QGenContext const&);                           \
    template DecoderState<T> advance_decoder<T>(QGenModel<T> const&, DecoderState<T> const&, TokenId);            \
    template std::vector<T> next_log_probs<T>(QGenModel<T> const&, DecoderState<T> const&);
DISCRIMQ_INSTANTIATE(float)
DISCRIMQ_INSTANTIATE(double)
#undef DISCRIMQ_INSTANTIATE

}  // namespace discrimq::qgen
