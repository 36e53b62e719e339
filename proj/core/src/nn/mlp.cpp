#include "discrimq/nn/mlp.hpp"

#include <algorithm>
#include <cmath>

#include "discrimq/errors.hpp"

namespace discrimq::nn {

namespace {

template <typename T>
T activate(Activation a, T z) {
    switch (a) {
    case Activation::identity:
        return z;
    case Activation::tanh:
        return std::tanh(z);
    case Activation::relu:
        return z > T{0} ? z : T{0};
    case Activation::sigmoid:
        return sigmoid(z);
    }
    return z;
}

// Derivative expressed through the activation output y.
template <typename T>
T activation_slope(Activation a, T y) {
    switch (a) {
    case Activation::identity:
        return T{1};
    case Activation::tanh:
        return T{1} - y * y;
    case Activation::relu:
        return y > T{0} ? T{1} : T{0};
    case Activation::sigmoid:
        return y * (T{1} - y);
    }
    return T{1};
}

}  // namespace

template <typename T>
DenseLayer add_dense_layer(ParamStore<T>& store, std::string const& prefix, std::size_t in, std::size_t out,
                           Activation activation) {
    DenseLayer layer;
    layer.weight = store.add(prefix + ".weight", out, in);
    layer.bias = store.add(prefix + ".bias", out, 1);
    layer.activation = activation;
    return layer;
}

template <typename T>
std::vector<T> mlp_forward(std::span<T const> x, ParamStore<T> const& store, std::span<DenseLayer const> layers,
                           MlpCache<T>* cache) {
    if (cache != nullptr) {
        cache->inputs.clear();
        cache->outputs.clear();
    }
    std::vector<T> current(x.begin(), x.end());
    for (auto const& layer : layers) {
        auto const& w = store.value(layer.weight);
        auto const bias = store.value(layer.bias).data();
        if (bias.size() != w.rows()) {
            throw ShapeError(store.name(layer.bias) + ": bias size does not match weight rows");
        }
        std::vector<T> z(bias.begin(), bias.end());
        gemv_acc<T>(w, current, z, store.name(layer.weight));
        for (auto& v : z) {
            v = activate(layer.activation, v);
        }
        if (cache != nullptr) {
            cache->inputs.push_back(std::move(current));
            cache->outputs.push_back(z);
        }
        current = std::move(z);
    }
    return current;
}

template <typename T>
std::vector<T> mlp_backward(MlpCache<T> const& cache, std::span<T const> grad, GradientAt where,
                            ParamStore<T>& store, std::span<DenseLayer const> layers) {
    if (cache.inputs.size() != layers.size()) {
        throw StateError("mlp_backward: cache does not match layer count");
    }
    std::vector<T> g(grad.begin(), grad.end());
    for (std::size_t li = layers.size(); li-- > 0;) {
        auto const& layer = layers[li];
        auto const& y = cache.outputs[li];
        require_same_size(g.size(), y.size(), "mlp gradient");
        bool const skip_slope = (li + 1 == layers.size()) && where == GradientAt::pre_activation;
        if (!skip_slope) {
            for (std::size_t k = 0; k < g.size(); ++k) {
                g[k] *= activation_slope(layer.activation, y[k]);
            }
        }
        outer_acc<T>(store.grad(layer.weight), g, cache.inputs[li], store.name(layer.weight));
        auto db = store.grad(layer.bias).data();
        for (std::size_t k = 0; k < g.size(); ++k) {
            db[k] += g[k];
        }
        std::vector<T> dx(cache.inputs[li].size());
        gemv_t_acc<T>(store.value(layer.weight), g, dx, store.name(layer.weight));
        g = std::move(dx);
    }
    return g;
}

#define DISCRIMQ_INSTANTIATE(T)                                                                            \
    template DenseLayer add_dense_layer<T>(ParamStore<T>&, std::string const&, std::size_t, std::size_t,  \
                                           Activation);                                                   \
    template std::vector<T> mlp_forward<T>(std::span<T const>, ParamStore<T> const&,                       \
                                           std::span<DenseLayer const>, MlpCache<T>*);                     \
    template std::vector<T> mlp_backward<T>(MlpCache<T> const&, std::span<T const>, GradientAt, ParamStore<T>&, \
                                            std::span<DenseLayer const>);

DISCRIMQ_INSTANTIATE(float)
DISCRIMQ_INSTANTIATE(double)

#undef DISCRIMQ_INSTANTIATE

}  // namespace discrimq::nn
