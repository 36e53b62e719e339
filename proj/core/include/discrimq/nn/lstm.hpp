#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "discrimq/nn/param_store.hpp"

namespace discrimq::nn {

/// One LSTM layer. `weight` is (4H x (X+H)) over the input [x; h_prev], gate
/// blocks ordered input, forget, output, candidate. `bias` is (4H x 1).
struct LstmLayer {
    ParamId weight;
    ParamId bias;
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 0;
};

template <typename T>
struct LstmState {
    std::vector<T> h;
    std::vector<T> c;

    static LstmState zeros(std::size_t hidden) { return {std::vector<T>(hidden), std::vector<T>(hidden)}; }
    friend bool operator==(LstmState const&, LstmState const&) = default;
};

/// Forward activations kept for the backward pass.
template <typename T>
struct LstmCache {
    std::vector<T> input;  // [x; h_prev]
    std::vector<T> c_prev;
    std::vector<T> gates;  // post-activation i, f, o, g
    std::vector<T> c;
    std::vector<T> tanh_c;
};

template <typename T>
LstmLayer add_lstm_layer(ParamStore<T>& store, std::string const& prefix, std::size_t input_dim,
                         std::size_t hidden_dim);

template <typename T>
LstmState<T> lstm_step(std::span<T const> x, LstmState<T> const& state, ParamStore<T> const& store,
                       LstmLayer const& layer, LstmCache<T>* cache = nullptr);

/// Gradients of one step. dh/dc arrive from above and from the next step;
/// parameter gradients accumulate into the store.
template <typename T>
struct LstmStepGrads {
    std::vector<T> dx;
    std::vector<T> dh_prev;
    std::vector<T> dc_prev;
};

template <typename T>
LstmStepGrads<T> lstm_step_backward(LstmCache<T> const& cache, std::span<T const> dh, std::span<T const> dc,
                                    ParamStore<T>& store, LstmLayer const& layer);

}  // namespace discrimq::nn
