#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace discrimq::nn {

/// Dense row-major matrix. Vectors are plain std::vector<T> / std::span<T>.
template <typename T>
class Tensor {
  public:
    using value_type = T;

    Tensor() = default;
    Tensor(std::size_t rows, std::size_t cols, T fill = T{0})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Tensor(std::size_t rows, std::size_t cols, std::vector<T> data);

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    T& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    T const& operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    [[nodiscard]] std::span<T> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    [[nodiscard]] std::span<T const> row(std::size_t r) const noexcept {
        return {data_.data() + r * cols_, cols_};
    }

    [[nodiscard]] std::span<T> data() noexcept { return data_; }
    [[nodiscard]] std::span<T const> data() const noexcept { return data_; }

    void fill(T value);
    [[nodiscard]] bool all_finite() const;

    friend bool operator==(Tensor const&, Tensor const&) = default;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using DenseMatrix = Tensor<float>;

template <typename T>
T dot(std::span<T const> a, std::span<T const> b);

/// y += W x. `name` identifies W in shape errors.
template <typename T>
void gemv_acc(Tensor<T> const& w, std::span<T const> x, std::span<T> y, std::string_view name);

/// dx += W^T dy.
template <typename T>
void gemv_t_acc(Tensor<T> const& w, std::span<T const> dy, std::span<T> dx, std::string_view name);

/// g += dy x^T.
template <typename T>
void outer_acc(Tensor<T>& g, std::span<T const> dy, std::span<T const> x, std::string_view name);

/// W W^T, each entry accumulated in the same order as dot(row_i, row_j).
template <typename T>
std::vector<double> gram_rows(Tensor<T> const& w);

template <typename T>
T sigmoid(T x);

template <typename T>
[[nodiscard]] bool all_finite(std::span<T const> values);

void require_same_size(std::size_t got, std::size_t expected, std::string_view what);

}  // namespace discrimq::nn
