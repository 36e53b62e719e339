#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace discrimq::nn {

/// Clamp applied before every logarithm.
inline constexpr double kLogClamp = 1e-12;

/// Mean binary cross-entropy over K components.
template <typename T>
T loss_multilabel(std::span<T const> scores, std::span<T const> targets);

/// d(loss_multilabel(sigmoid(z)))/dz = (s - t) / K.
template <typename T>
std::vector<T> multilabel_logit_grad(std::span<T const> scores, std::span<T const> targets);

template <typename T>
T logsumexp(std::span<T const> values);

template <typename T>
std::vector<T> log_softmax(std::span<T const> logits);

/// -log softmax(logits)[target], via log-sum-exp.
template <typename T>
T loss_categorical(std::span<T const> logits, std::size_t target);

/// softmax(logits) - onehot(target).
template <typename T>
std::vector<T> categorical_logit_grad(std::span<T const> logits, std::size_t target);

}  // namespace discrimq::nn
