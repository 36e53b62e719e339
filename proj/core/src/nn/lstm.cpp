#include "discrimq/nn/lstm.hpp"

#include <cmath>

#include "discrimq/errors.hpp"

namespace discrimq::nn {

template <typename T>
LstmLayer add_lstm_layer(ParamStore<T>& store, std::string const& prefix, std::size_t input_dim,
                         std::size_t hidden_dim) {
    LstmLayer layer;
    layer.weight = store.add(prefix + ".weight", 4 * hidden_dim, input_dim + hidden_dim);
    layer.bias = store.add(prefix + ".bias", 4 * hidden_dim, 1);
    layer.input_dim = input_dim;
    layer.hidden_dim = hidden_dim;
    return layer;
}

template <typename T>
LstmState<T> lstm_step(std::span<T const> x, LstmState<T> const& state, ParamStore<T> const& store,
                       LstmLayer const& layer, LstmCache<T>* cache) {
    std::size_t const hd = layer.hidden_dim;
    std::string const& wname = store.name(layer.weight);
    if (x.size() != layer.input_dim) {
        throw ShapeError(wname + ": input size " + std::to_string(x.size()) + " does not match " +
                         std::to_string(layer.input_dim));
    }
    if (state.h.size() != hd || state.c.size() != hd) {
        throw ShapeError(wname + ": state size does not match hidden size " + std::to_string(hd));
    }

    std::vector<T> input(layer.input_dim + hd);
    std::copy(x.begin(), x.end(), input.begin());
    std::copy(state.h.begin(), state.h.end(), input.begin() + static_cast<std::ptrdiff_t>(layer.input_dim));

    auto const bias = store.value(layer.bias).data();
    std::vector<T> gates(bias.begin(), bias.end());
    gemv_acc<T>(store.value(layer.weight), input, gates, wname);

    for (std::size_t k = 0; k < 3 * hd; ++k) {
        gates[k] = sigmoid(gates[k]);
    }
    for (std::size_t k = 3 * hd; k < 4 * hd; ++k) {
        gates[k] = std::tanh(gates[k]);
    }

    LstmState<T> next = LstmState<T>::zeros(hd);
    std::vector<T> tanh_c(hd);
    for (std::size_t k = 0; k < hd; ++k) {
        T const i = gates[k];
        T const f = gates[hd + k];
        T const o = gates[2 * hd + k];
        T const g = gates[3 * hd + k];
        next.c[k] = f * state.c[k] + i * g;
        tanh_c[k] = std::tanh(next.c[k]);
        next.h[k] = o * tanh_c[k];
    }

    if (cache != nullptr) {
        cache->input = std::move(input);
        cache->c_prev = state.c;
        cache->gates = std::move(gates);
        cache->c = next.c;
        cache->tanh_c = std::move(tanh_c);
    }
    return next;
}

template <typename T>
LstmStepGrads<T> lstm_step_backward(LstmCache<T> const& cache, std::span<T const> dh, std::span<T const> dc,
                                    ParamStore<T>& store, LstmLayer const& layer) {
    std::size_t const hd = layer.hidden_dim;
    require_same_size(dh.size(), hd, "lstm dh");
    require_same_size(dc.size(), hd, "lstm dc");

    std::vector<T> dz(4 * hd);
    LstmStepGrads<T> out;
    out.dc_prev.resize(hd);
    for (std::size_t k = 0; k < hd; ++k) {
        T const i = cache.gates[k];
        T const f = cache.gates[hd + k];
        T const o = cache.gates[2 * hd + k];
        T const g = cache.gates[3 * hd + k];
        T const tc = cache.tanh_c[k];
        T const dct = dc[k] + dh[k] * o * (T{1} - tc * tc);
        T const d_o = dh[k] * tc;
        T const d_i = dct * g;
        T const d_g = dct * i;
        T const d_f = dct * cache.c_prev[k];
        out.dc_prev[k] = dct * f;
        dz[k] = d_i * i * (T{1} - i);
        dz[hd + k] = d_f * f * (T{1} - f);
        dz[2 * hd + k] = d_o * o * (T{1} - o);
        dz[3 * hd + k] = d_g * (T{1} - g * g);
    }

    std::string const& wname = store.name(layer.weight);
    outer_acc<T>(store.grad(layer.weight), dz, cache.input, wname);
    auto db = store.grad(layer.bias).data();
    for (std::size_t k = 0; k < dz.size(); ++k) {
        db[k] += dz[k];
    }

    std::vector<T> dinput(layer.input_dim + hd);
    gemv_t_acc<T>(store.value(layer.weight), dz, dinput, wname);
    out.dx.assign(dinput.begin(), dinput.begin() + static_cast<std::ptrdiff_t>(layer.input_dim));
    out.dh_prev.assign(dinput.begin() + static_cast<std::ptrdiff_t>(layer.input_dim), dinput.end());
    return out;
}

#define DISCRIMQ_INSTANTIATE(T)                                                                        \
    template LstmLayer add_lstm_layer<T>(ParamStore<T>&, std::string const&, std::size_t, std::size_t); \
    template LstmState<T> lstm_step<T>(std::span<T const>, LstmState<T> const&, ParamStore<T> const&,   \
                                       LstmLayer const&, LstmCache<T>*);                               \
    template LstmStepGrads<T> lstm_step_backward<T>(LstmCache<T> const&, std::span<T const>,            \
                                                    std::span<T const>, ParamStore<T>&, LstmLayer const&);

DISCRIMQ_INSTANTIATE(float)
DISCRIMQ_INSTANTIATE(double)

#undef DISCRIMQ_INSTANTIATE

}  // namespace discrimq::nn
