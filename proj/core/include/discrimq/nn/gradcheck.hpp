#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

#include "discrimq/nn/param_store.hpp"

namespace discrimq::nn {

/// Evaluates the loss at the store's current values. When `with_grad` is set
/// it must also accumulate analytic gradients into the (already zeroed) store.
using LossFunction = std::function<double(ParamStore<double>& store, bool with_grad)>;

enum class Stencil {
    /// (f(w+e) - f(w-e)) / 2e
    two_point,
    /// (8(f(w+e) - f(w-e)) - (f(w+2e) - f(w-2e))) / 12e
    four_point,
};

struct GradCheckOptions {
    /// Four-point differences allow a larger step, which keeps float64
    /// roundoff below 1e-4 relative even on near-zero gradients.
    Stencil stencil = Stencil::four_point;
    double eps = 1e-3;
    /// Coordinates sampled per parameter tensor; 0 checks every coordinate.
    std::size_t samples_per_param = 0;
    std::uint64_t seed = 0;
};

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::string worst_param;
    std::size_t worst_index = 0;
    std::size_t coordinates = 0;
};

/// Compares analytic gradients with central differences. The relative error
/// of a coordinate is |a - n| / max(|a|, |n|, 1e-8).
GradCheckResult finite_diff_check(LossFunction const& loss, ParamStore<double>& store,
                                  GradCheckOptions const& options = {});

}  // namespace discrimq::nn
