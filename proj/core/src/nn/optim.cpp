#include "discrimq/nn/optim.hpp"

#include <cmath>

#include "discrimq/errors.hpp"

namespace discrimq::nn {

template <typename T>
void adam_update(ParamStore<T>& store, AdamConfig const& hyper) {
    for (auto const& e : store.entries()) {
        if (e.trainable && !e.grad_ready) {
            throw StateError("adam_update: gradient of '" + e.name + "' was never populated");
        }
    }
    std::uint64_t const t = store.step() + 1;
    double const c1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(t));
    double const c2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(t));
    for (auto& e : store.entries()) {
        if (!e.trainable) {
            continue;
        }
        auto w = e.value.data();
        auto const g = e.grad.data();
        auto m = e.first_moment.data();
        auto v = e.second_moment.data();
        for (std::size_t k = 0; k < w.size(); ++k) {
            double const gk = static_cast<double>(g[k]);
            double const mk = hyper.beta1 * static_cast<double>(m[k]) + (1.0 - hyper.beta1) * gk;
            double const vk = hyper.beta2 * static_cast<double>(v[k]) + (1.0 - hyper.beta2) * gk * gk;
            m[k] = static_cast<T>(mk);
            v[k] = static_cast<T>(vk);
            double const step = hyper.lr * (mk / c1) / (std::sqrt(vk / c2) + hyper.eps);
            w[k] = static_cast<T>(static_cast<double>(w[k]) - step);
        }
        if (!e.value.all_finite()) {
            throw NumericError("adam_update produced a non-finite value in '" + e.name + "'");
        }
    }
    store.set_step(t);
}

template <typename T>
double global_grad_norm(ParamStore<T> const& store) {
    double acc = 0.0;
    for (auto const& e : store.entries()) {
        for (T g : e.grad.data()) {
            acc += static_cast<double>(g) * static_cast<double>(g);
        }
    }
    return std::sqrt(acc);
}

template <typename T>
double clip_gradients(ParamStore<T>& store, double max_norm) {
    if (!(max_norm > 0.0)) {
        throw DomainError("clip_gradients: max_norm must be positive");
    }
    double const norm = global_grad_norm(store);
    if (norm > max_norm) {
        double const scale = max_norm / norm;
        for (auto& e : store.entries()) {
            for (auto& g : e.grad.data()) {
                g = static_cast<T>(static_cast<double>(g) * scale);
            }
        }
    }
    return norm;
}

template void adam_update<float>(ParamStore<float>&, AdamConfig const&);
template void adam_update<double>(ParamStore<double>&, AdamConfig const&);
template double clip_gradients<float>(ParamStore<float>&, double);
template double clip_gradients<double>(ParamStore<double>&, double);
template double global_grad_norm<float>(ParamStore<float> const&);
template double global_grad_norm<double>(ParamStore<double> const&);

}  // namespace discrimq::nn
