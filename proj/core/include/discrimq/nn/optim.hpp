#pragma once

#include "discrimq/nn/param_store.hpp"

namespace discrimq::nn {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Bias-corrected Adam step over every trainable parameter, then t += 1.
/// Throws StateError if a gradient buffer was never populated.
template <typename T>
void adam_update(ParamStore<T>& store, AdamConfig const& hyper);

/// Scales all gradients by max_norm/norm when the global L2 norm exceeds
/// max_norm. Returns the pre-clip norm.
template <typename T>
double clip_gradients(ParamStore<T>& store, double max_norm);

template <typename T>
double global_grad_norm(ParamStore<T> const& store);

}  // namespace discrimq::nn
