#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "discrimq/attributes/attribute_vocab.hpp"
#include "discrimq/corpus/ingest.hpp"
#include "discrimq/corpus/region.hpp"
#include "discrimq/nn/mlp.hpp"
#include "discrimq/nn/train.hpp"
#include "discrimq/similarity.hpp"

namespace discrimq::attributes {

struct AttrHyper {
    std::size_t hidden = 64;
    nn::TrainSchedule schedule{50, 50, {}, 5.0};
    std::uint64_t seed = 1;
};

/// Hidden width 512 for the real profile, 64 for the synthetic one.
AttrHyper default_attr_hyper(corpus::Profile profile);

/// Region representation and its multi-hot attribute labels.
struct AttrSample {
    std::vector<float> input;
    std::vector<float> target;
};

std::vector<AttrSample> make_attr_samples(std::span<corpus::RegionRecord const* const> regions,
                                          AttributeVocab const& vocab);

/// input -> tanh hidden -> K sigmoid. The output weight is W_f.
template <typename T>
struct AttrModel {
    nn::ParamStore<T> params;
    std::vector<nn::DenseLayer> layers;
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 0;
    std::size_t num_attributes = 0;

    [[nodiscard]] nn::Tensor<T> const& w_f() const { return params.value(layers.back().weight); }
};

/// All parameters zero.
template <typename T>
AttrModel<T> make_attr_model(std::size_t input_dim, std::size_t hidden, std::size_t num_attributes);

/// Mean over the batch of the mean binary cross-entropy. With `with_grad`,
/// gradients of that mean accumulate into model.params.
template <typename T>
T attr_loss(AttrModel<T>& model, std::span<AttrSample const> batch, bool with_grad);

/// Throws DataError for an empty training set.
AttrModel<float> train_attr_model(std::span<AttrSample const> samples, std::size_t input_dim,
                                  std::size_t num_attributes, AttrHyper const& hyper,
                                  std::vector<double>* epoch_losses = nullptr);

/// Sigmoid scores in [0,1]^K. Throws ShapeError on an input length mismatch.
template <typename T>
std::vector<T> predict_attributes(AttrModel<T> const& model, std::span<float const> input);
std::vector<float> predict_attributes(AttrModel<float> const& model, corpus::RegionRecord const& region);

/// <w_fi, w_fj>; throws IndexError.
double visual_similarity(AttrModel<float> const& model, std::size_t i, std::size_t j);
SimilarityMatrix visual_similarity_matrix(AttrModel<float> const& model, bool cosine = false);

/// Mean over attributes with at least one positive of the average
/// precision of the score ranking (ties broken by sample order).
double mean_average_precision(std::span<std::vector<float> const> scores,
                              std::span<std::vector<float> const> labels);

void save_attr_model(std::filesystem::path const& path, AttrModel<float> const& model);
AttrModel<float> load_attr_model(std::filesystem::path const& path);

}  // namespace discrimq::attributes
