#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "discrimq/nn/gradcheck.hpp"

namespace discrimq::app {

inline constexpr double kGradCheckTolerance = 1e-4;

struct ModelGradCheck {
    std::string model;
    nn::GradCheckResult result;
};

/// Central-difference checks in double precision of the attribute MLP, the
/// VQA model and both question generators at tiny dimensions.
std::vector<ModelGradCheck> run_gradchecks(std::uint64_t seed);

}  // namespace discrimq::app
