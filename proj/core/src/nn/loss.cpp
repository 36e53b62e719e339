#include "discrimq/nn/loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "discrimq/errors.hpp"
#include "discrimq/nn/tensor.hpp"

namespace discrimq::nn {

template <typename T>
T loss_multilabel(std::span<T const> scores, std::span<T const> targets) {
    require_same_size(targets.size(), scores.size(), "multilabel targets");
    if (scores.empty()) {
        throw ShapeError("multilabel loss over an empty vector");
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < scores.size(); ++k) {
        double const s = std::clamp(static_cast<double>(scores[k]), kLogClamp, 1.0 - kLogClamp);
        double const t = static_cast<double>(targets[k]);
        acc -= t * std::log(s) + (1.0 - t) * std::log(1.0 - s);
    }
    double const loss = acc / static_cast<double>(scores.size());
    if (!std::isfinite(loss)) {
        throw NumericError("multilabel loss is not finite");
    }
    return static_cast<T>(loss);
}

template <typename T>
std::vector<T> multilabel_logit_grad(std::span<T const> scores, std::span<T const> targets) {
    require_same_size(targets.size(), scores.size(), "multilabel targets");
    std::vector<T> g(scores.size());
    T const inv = T{1} / static_cast<T>(scores.size());
    for (std::size_t k = 0; k < scores.size(); ++k) {
        g[k] = (scores[k] - targets[k]) * inv;
    }
    return g;
}

template <typename T>
T logsumexp(std::span<T const> values) {
    if (values.empty()) {
        return -std::numeric_limits<T>::infinity();
    }
    T const m = *std::max_element(values.begin(), values.end());
    if (!std::isfinite(m)) {
        return m;
    }
    T acc{0};
    for (T v : values) {
        acc += std::exp(v - m);
    }
    return m + std::log(acc);
}

template <typename T>
std::vector<T> log_softmax(std::span<T const> logits) {
    T const lse = logsumexp(logits);
    std::vector<T> out(logits.size());
    for (std::size_t k = 0; k < logits.size(); ++k) {
        out[k] = logits[k] - lse;
    }
    return out;
}

template <typename T>
T loss_categorical(std::span<T const> logits, std::size_t target) {
    if (logits.size() < 2) {
        throw ShapeError("categorical loss needs at least two classes");
    }
    if (target >= logits.size()) {
        throw IndexError("categorical target " + std::to_string(target) + " out of range " +
                         std::to_string(logits.size()));
    }
    T const loss = logsumexp(logits) - logits[target];
    if (!std::isfinite(loss)) {
        throw NumericError("categorical loss is not finite");
    }
    return loss;
}

template <typename T>
std::vector<T> categorical_logit_grad(std::span<T const> logits, std::size_t target) {
    if (target >= logits.size()) {
        throw IndexError("categorical target out of range");
    }
    std::vector<T> g = log_softmax(logits);
    for (auto& v : g) {
        v = std::exp(v);
    }
    g[target] -= T{1};
    return g;
}

#define DISCRIMQ_INSTANTIATE(T)                                                               \
    template T loss_multilabel<T>(std::span<T const>, std::span<T const>);                    \
    template std::vector<T> multilabel_logit_grad<T>(std::span<T const>, std::span<T const>); \
    template T logsumexp<T>(std::span<T const>);                                              \
    template std::vector<T> log_softmax<T>(std::span<T const>);                               \
    template T loss_categorical<T>(std::span<T const>, std::size_t);                          \
    template std::vector<T> categorical_logit_grad<T>(std::span<T const>, std::size_t);

DISCRIMQ_INSTANTIATE(float)
DISCRIMQ_INSTANTIATE(double)

#undef DISCRIMQ_INSTANTIATE

}  // namespace discrimq::nn
