#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "discrimq/attributes/attribute_vocab.hpp"
#include "discrimq/corpus/ingest.hpp"
#include "discrimq/corpus/region.hpp"
#include "discrimq/corpus/vocabulary.hpp"
#include "discrimq/nn/lstm.hpp"
#include "discrimq/nn/train.hpp"
#include "discrimq/similarity.hpp"

namespace discrimq::vqa {

struct VqaHyper {
    std::size_t embed = 32;
    std::size_t hidden = 32;
    nn::TrainSchedule schedule{30, 50, {}, 5.0};
    std::uint64_t seed = 2;
};

/// Embedding 300 / hidden 512 for the real profile, 32 / 32 for synthetic.
VqaHyper default_vqa_hyper(corpus::Profile profile);

struct VqaSample {
    std::vector<corpus::TokenId> words;
    std::vector<float> feature;
    std::size_t answer = 0;
};

struct VqaData {
    std::vector<VqaSample> samples;
    /// QA pairs whose answer is not exactly an attribute expression.
    std::size_t dropped = 0;
};

/// Keeps QA pairs whose tokenized answer equals an attribute's tokens.
VqaData make_vqa_samples(std::span<corpus::RegionRecord const* const> regions, corpus::Vocabulary const& vocab,
                         attributes::AttributeVocab const& attrs,
                         std::size_t max_len = corpus::kDefaultMaxQuestionLength);

/// logits = W_q h_q + W_v f + b, h_q the last hidden state of an LSTM run
/// over the question's word embeddings and f the region representation.
template <typename T>
struct VqaModel {
    nn::ParamStore<T> params;
    nn::ParamId embed;
    nn::LstmLayer lstm;
    nn::ParamId w_q;
    nn::ParamId w_v;
    nn::ParamId bias;
    std::size_t vocab_size = 0;
    std::size_t feature_dim = 0;
    std::size_t num_answers = 0;

    [[nodiscard]] nn::Tensor<T> const& w_q_matrix() const { return params.value(w_q); }
};

/// All parameters zero.
template <typename T>
VqaModel<T> make_vqa_model(std::size_t vocab_size, std::size_t embed, std::size_t hidden, std::size_t feature_dim,
                           std::size_t num_answers);

/// Mean categorical cross-entropy over samples[ids]; with `with_grad` the
/// gradient of that mean accumulates into model.params.
template <typename T>
T vqa_loss(VqaModel<T>& model, std::span<VqaSample const> samples, std::span<std::size_t const> ids,
           bool with_grad);

/// Throws DataError when no sample survived answer filtering.
VqaModel<float> train_vqa(std::span<VqaSample const> samples, std::size_t vocab_size, std::size_t feature_dim,
                          std::size_t num_answers, VqaHyper const& hyper,
                          std::vector<double>* epoch_losses = nullptr);

template <typename T>
std::vector<T> answer_logits(VqaModel<T> const& model, std::span<corpus::TokenId const> words,
                             std::span<float const> feature);

struct Answer {
    std::size_t index = 0;
    double probability = 0.0;
};

/// Argmax with ties to the lowest index. Throws InputError for an empty
/// question.
Answer predict_answer(VqaModel<float> const& model, std::span<corpus::TokenId const> words,
                      std::span<float const> feature);

double answer_accuracy(VqaModel<float> const& model, std::span<VqaSample const> samples);

/// <w_qi, w_qj>; throws IndexError.
double question_similarity(VqaModel<float> const& model, std::size_t i, std::size_t j);
SimilarityMatrix question_similarity_matrix(VqaModel<float> const& model, bool cosine = false);

void save_vqa_model(std::filesystem::path const& path, VqaModel<float> const& model);
VqaModel<float> load_vqa_model(std::filesystem::path const& path);

}  // namespace discrimq::vqa
