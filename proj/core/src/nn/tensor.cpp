#include "discrimq/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "discrimq/errors.hpp"

namespace discrimq::nn {

void require_same_size(std::size_t got, std::size_t expected, std::string_view what) {
    if (got != expected) {
        throw ShapeError(std::string(what) + ": expected size " + std::to_string(expected) + ", got " +
                         std::to_string(got));
    }
}

template <typename T>
Tensor<T>::Tensor(std::size_t rows, std::size_t cols, std::vector<T> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    require_same_size(data_.size(), rows * cols, "tensor data");
}

template <typename T>
void Tensor<T>::fill(T value) {
    std::fill(data_.begin(), data_.end(), value);
}

template <typename T>
bool Tensor<T>::all_finite() const {
    return nn::all_finite<T>(data_);
}

template <typename T>
T dot(std::span<T const> a, std::span<T const> b) {
    require_same_size(b.size(), a.size(), "dot operand");
    T acc{0};
    for (std::size_t k = 0; k < a.size(); ++k) {
        acc += a[k] * b[k];
    }
    return acc;
}

template <typename T>
void gemv_acc(Tensor<T> const& w, std::span<T const> x, std::span<T> y, std::string_view name) {
    if (x.size() != w.cols() || y.size() != w.rows()) {
        throw ShapeError(std::string(name) + ": matrix " + std::to_string(w.rows()) + "x" +
                         std::to_string(w.cols()) + " applied to input of size " + std::to_string(x.size()) +
                         " with output size " + std::to_string(y.size()));
    }
    for (std::size_t r = 0; r < w.rows(); ++r) {
        auto const row = w.row(r);
        T acc{0};
        for (std::size_t c = 0; c < row.size(); ++c) {
            acc += row[c] * x[c];
        }
        y[r] += acc;
    }
}

template <typename T>
void gemv_t_acc(Tensor<T> const& w, std::span<T const> dy, std::span<T> dx, std::string_view name) {
    if (dy.size() != w.rows() || dx.size() != w.cols()) {
        throw ShapeError(std::string(name) + ": transposed product shape mismatch");
    }
    for (std::size_t r = 0; r < w.rows(); ++r) {
        T const g = dy[r];
        if (g == T{0}) {
            continue;
        }
        auto const row = w.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) {
            dx[c] += row[c] * g;
        }
    }
}

template <typename T>
void outer_acc(Tensor<T>& g, std::span<T const> dy, std::span<T const> x, std::string_view name) {
    if (dy.size() != g.rows() || x.size() != g.cols()) {
        throw ShapeError(std::string(name) + ": gradient outer-product shape mismatch");
    }
    for (std::size_t r = 0; r < g.rows(); ++r) {
        T const d = dy[r];
        if (d == T{0}) {
            continue;
        }
        auto row = g.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) {
            row[c] += d * x[c];
        }
    }
}

template <typename T>
std::vector<double> gram_rows(Tensor<T> const& w) {
    std::size_t const k = w.rows();
    std::vector<double> out(k * k);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i; j < k; ++j) {
            auto const a = w.row(i);
            auto const b = w.row(j);
            double acc = 0.0;
            for (std::size_t c = 0; c < a.size(); ++c) {
                acc += static_cast<double>(a[c]) * static_cast<double>(b[c]);
            }
            out[i * k + j] = acc;
            out[j * k + i] = acc;
        }
    }
    return out;
}

template <typename T>
T sigmoid(T x) {
    if (x >= T{0}) {
        return T{1} / (T{1} + std::exp(-x));
    }
    T const e = std::exp(x);
    return e / (T{1} + e);
}

template <typename T>
bool all_finite(std::span<T const> values) {
    return std::all_of(values.begin(), values.end(), [](T v) { return std::isfinite(v); });
}

#define DISCRIMQ_INSTANTIATE(T)                                                                     \
    template class Tensor<T>;                                                                       \
    template T dot<T>(std::span<T const>, std::span<T const>);                                      \
    template void gemv_acc<T>(Tensor<T> const&, std::span<T const>, std::span<T>, std::string_view); \
    template void gemv_t_acc<T>(Tensor<T> const&, std::span<T const>, std::span<T>, std::string_view); \
    template void outer_acc<T>(Tensor<T>&, std::span<T const>, std::span<T const>, std::string_view); \
    template std::vector<double> gram_rows<T>(Tensor<T> const&);                                    \
    template T sigmoid<T>(T);                                                                       \
    template bool all_finite<T>(std::span<T const>);

DISCRIMQ_INSTANTIATE(float)
DISCRIMQ_INSTANTIATE(double)

#undef DISCRIMQ_INSTANTIATE

}  // namespace discrimq::nn
