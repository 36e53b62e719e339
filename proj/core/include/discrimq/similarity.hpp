#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "discrimq/nn/tensor.hpp"

namespace discrimq {

/// Symmetric K x K matrix of attribute similarities, row-major.
class SimilarityMatrix {
  public:
    SimilarityMatrix() = default;
    SimilarityMatrix(std::size_t n, std::vector<double> values);

    /// Inner products of the rows of W (W W^T); with `cosine` each row is
    /// first scaled to unit length (zero rows stay zero).
    template <typename T>
    static SimilarityMatrix from_rows(nn::Tensor<T> const& w, bool cosine = false);

    [[nodiscard]] std::size_t size() const noexcept { return n_; }
    /// Bounds-checked; throws IndexError.
    [[nodiscard]] double at(std::size_t i, std::size_t j) const;
    [[nodiscard]] double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * n_ + j]; }
    [[nodiscard]] std::vector<double> const& values() const noexcept { return values_; }
    [[nodiscard]] double max_abs() const;
    [[nodiscard]] double min() const;
    [[nodiscard]] bool is_symmetric() const;

    /// Headerless CSV, one row per line, shortest round-trip decimals.
    void write_csv(std::ostream& out) const;
    static SimilarityMatrix read_csv(std::istream& in);

    friend bool operator==(SimilarityMatrix const&, SimilarityMatrix const&) = default;

  private:
    std::size_t n_ = 0;
    std::vector<double> values_;
};

}  // namespace discrimq
