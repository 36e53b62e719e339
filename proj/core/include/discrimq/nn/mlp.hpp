#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "discrimq/nn/param_store.hpp"

namespace discrimq::nn {

enum class Activation { identity, tanh, relu, sigmoid };

/// y = act(W x + b), W is (out x in), b is (out x 1).
struct DenseLayer {
    ParamId weight;
    ParamId bias;
    Activation activation = Activation::identity;
};

template <typename T>
DenseLayer add_dense_layer(ParamStore<T>& store, std::string const& prefix, std::size_t in, std::size_t out,
                           Activation activation);

template <typename T>
struct MlpCache {
    std::vector<std::vector<T>> inputs;   // input to each layer
    std::vector<std::vector<T>> outputs;  // post-activation output of each layer
};

/// Runs the layers in order. Throws ShapeError when the chain does not line up.
template <typename T>
std::vector<T> mlp_forward(std::span<T const> x, ParamStore<T> const& store, std::span<DenseLayer const> layers,
                           MlpCache<T>* cache = nullptr);

/// Where the incoming gradient of mlp_backward is taken.
enum class GradientAt { output, pre_activation };

/// Accumulates parameter gradients, returns dL/dx.
template <typename T>
std::vector<T> mlp_backward(MlpCache<T> const& cache, std::span<T const> grad, GradientAt where,
                            ParamStore<T>& store, std::span<DenseLayer const> layers);

}  // namespace discrimq::nn
