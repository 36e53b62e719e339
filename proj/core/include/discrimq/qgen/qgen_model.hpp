#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "discrimq/attributes/attribute_vocab.hpp"
#include "discrimq/corpus/ingest.hpp"
#include "discrimq/corpus/region.hpp"
#include "discrimq/corpus/vocabulary.hpp"
#include "discrimq/nn/lstm.hpp"
#include "discrimq/nn/train.hpp"

namespace discrimq::qgen {

enum class QGenMode { conditioned, baseline };

std::string mode_name(QGenMode mode);

struct QGenHyper {
    std::size_t embed = 32;
    std::size_t hidden = 32;
    std::size_t layers = 2;
    std::size_t att_dim = 64;
    nn::TrainSchedule schedule{30, 50, {}, 5.0};
    std::uint64_t seed = 3;
};

/// Embedding and hidden 512 for the real profile, 32 for synthetic.
QGenHyper default_qgen_hyper(corpus::Profile profile);

struct QGenSample {
    std::vector<float> feature;
    /// Ground-truth answer attribute; unset for the baseline.
    std::optional<std::size_t> attribute;
    std::vector<corpus::TokenId> words;
};

struct QGenData {
    std::vector<QGenSample> samples;
    /// QA pairs left out: unmatched answers (conditioned) or empty questions.
    std::size_t dropped = 0;
};

/// Conditioned mode keeps QA pairs whose answer tokens equal an attribute
/// expression; baseline mode keeps every non-empty question.
QGenData make_qgen_samples(std::span<corpus::RegionRecord const* const> regions, corpus::Vocabulary const& vocab,
                           attributes::AttributeVocab const& attrs, QGenMode mode,
                           std::size_t max_len = corpus::kDefaultMaxQuestionLength);

/// Stacked LSTM language model. Inputs are the projected region feature,
/// then (conditioned) the projected attribute embedding, then the begin
/// marker and the words; it predicts the words and the end marker.
template <typename T>
struct QGenModel {
    QGenMode mode = QGenMode::conditioned;
    nn::ParamStore<T> params;
    nn::ParamId embed;
    nn::ParamId img_proj;
    nn::ParamId img_bias;
    nn::ParamId att_table;
    nn::ParamId att_proj;
    std::vector<nn::LstmLayer> lstm;
    nn::ParamId out_w;
    nn::ParamId out_b;
    std::size_t vocab_size = 0;
    std::size_t feature_dim = 0;
    std::size_t num_attributes = 0;

    [[nodiscard]] bool conditioned() const noexcept { return mode == QGenMode::conditioned; }
    [[nodiscard]] std::size_t hidden_dim() const noexcept { return lstm.back().hidden_dim; }
};

/// All parameters zero. Baseline models carry no attribute tensors.
template <typename T>
QGenModel<T> make_qgen_model(QGenMode mode, std::size_t vocab_size, std::size_t feature_dim,
                             std::size_t num_attributes, QGenHyper const& dims);

/// Installs a fixed attribute embedding table (K x att_dim) and freezes it.
template <typename T>
void set_pretrained_attribute_embeddings(QGenModel<T>& model, nn::Tensor<T> const& table);

/// Reads a word-vector text file ("token v1 v2 ...", optional "count dim"
/// header) and averages the token vectors of every attribute expression.
/// Throws DataError when an attribute has no known token.
nn::Tensor<float> load_attribute_embeddings(std::filesystem::path const& path,
                                            attributes::AttributeVocab const& attrs);

/// Region feature and, for conditioned models, the attribute index.
struct QGenContext {
    std::span<float const> feature;
    std::optional<std::size_t> attribute;
};

/// Log distributions over the vocabulary at each prediction step of a
/// teacher-forced pass (words.size() + 1 rows).
template <typename T>
std::vector<std::vector<T>> teacher_forced_log_probs(QGenModel<T> const& model, QGenContext const& ctx,
                                                     std::span<corpus::TokenId const> words);

/// Mean over samples[ids] of the summed token negative log-likelihood. With
/// `with_grad` the gradient of that mean accumulates into model.params.
template <typename T>
T qgen_loss(QGenModel<T>& model, std::span<QGenSample const> samples, std::span<std::size_t const> ids,
            bool with_grad);

/// Throws DataError when there are no samples.
QGenModel<float> train_qgen(std::span<QGenSample const> samples, QGenMode mode, std::size_t vocab_size,
                            std::size_t feature_dim, std::size_t num_attributes, QGenHyper const& hyper,
                            std::optional<nn::Tensor<float>> const& pretrained = std::nullopt,
                            std::vector<double>* epoch_losses = nullptr);

/// exp of the mean per-token negative log-likelihood (end marker included).
double perplexity(QGenModel<float> const& model, std::span<QGenSample const> samples);

/// Recurrent state after consuming the context and the begin marker.
template <typename T>
struct DecoderState {
    std::vector<nn::LstmState<T>> layers;
};

template <typename T>
DecoderState<T> start_decoder(QGenModel<T> const& model, QGenContext const& ctx);
template <typename T>
DecoderState<T> advance_decoder(QGenModel<T> const& model, DecoderState<T> const& state, corpus::TokenId token);
/// Log distribution over the next token.
template <typename T>
std::vector<T> next_log_probs(QGenModel<T> const& model, DecoderState<T> const& state);

void save_qgen_model(std::filesystem::path const& path, QGenModel<float> const& model);
QGenModel<float> load_qgen_model(std::filesystem::path const& path);

}  // namespace discrimq::qgen
