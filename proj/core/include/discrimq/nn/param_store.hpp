#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "discrimq/nn/tensor.hpp"
#include "discrimq/rng.hpp"

namespace discrimq::nn {

/// Handle into a ParamStore. Models hold handles, never references, so they
/// stay copyable.
struct ParamId {
    std::size_t index = 0;
    friend bool operator==(ParamId, ParamId) = default;
};

/// Named parameter tensors with gradient and Adam moment buffers.
template <typename T>
class ParamStore {
  public:
    struct Entry {
        std::string name;
        Tensor<T> value;
        Tensor<T> grad;
        Tensor<T> first_moment;
        Tensor<T> second_moment;
        bool trainable = true;
        bool grad_ready = false;
    };

    ParamId add(std::string name, std::size_t rows, std::size_t cols, bool trainable = true);

    [[nodiscard]] ParamId id(std::string_view name) const;
    [[nodiscard]] bool contains(std::string_view name) const;

    [[nodiscard]] Tensor<T>& value(ParamId p) { return entries_.at(p.index).value; }
    [[nodiscard]] Tensor<T> const& value(ParamId p) const { return entries_.at(p.index).value; }
    [[nodiscard]] Tensor<T>& grad(ParamId p) { return entries_.at(p.index).grad; }
    [[nodiscard]] Tensor<T> const& grad(ParamId p) const { return entries_.at(p.index).grad; }
    [[nodiscard]] std::string const& name(ParamId p) const { return entries_.at(p.index).name; }

    [[nodiscard]] std::span<Entry> entries() noexcept { return entries_; }
    [[nodiscard]] std::span<Entry const> entries() const noexcept { return entries_; }
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
    [[nodiscard]] std::size_t parameter_count() const noexcept;

    [[nodiscard]] std::uint64_t step() const noexcept { return step_; }
    /// Step counter only moves forward.
    void set_step(std::uint64_t step);

    /// Clears every gradient buffer and marks it populated.
    void zero_grad();

    /// Uniform in +-1/sqrt(fan_in) with fan_in = cols, applied in insertion order.
    void init_uniform(Rng& rng);
    void set_trainable(ParamId p, bool trainable) { entries_.at(p.index).trainable = trainable; }

    /// Same names and shapes, values converted to U. Moments and step are copied too.
    template <typename U>
    [[nodiscard]] ParamStore<U> cast() const {
        ParamStore<U> out;
        for (auto const& e : entries_) {
            ParamId const p = out.add(e.name, e.value.rows(), e.value.cols(), e.trainable);
            auto src = e.value.data();
            auto dst = out.value(p).data();
            for (std::size_t k = 0; k < src.size(); ++k) {
                dst[k] = static_cast<U>(src[k]);
            }
        }
        out.set_step(step_);
        return out;
    }

  private:
    std::vector<Entry> entries_;
    std::map<std::string, std::size_t, std::less<>> index_;
    std::uint64_t step_ = 0;
};

extern template class ParamStore<float>;
extern template class ParamStore<double>;

}  // namespace discrimq::nn
