#include "discrimq/similarity.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "discrimq/errors.hpp"

namespace discrimq {

SimilarityMatrix::SimilarityMatrix(std::size_t n, std::vector<double> values) : n_(n), values_(std::move(values)) {
    if (values_.size() != n * n) {
        throw ShapeError("similarity matrix needs " + std::to_string(n * n) + " values, got " +
                         std::to_string(values_.size()));
    }
}

template <typename T>
SimilarityMatrix SimilarityMatrix::from_rows(nn::Tensor<T> const& w, bool cosine) {
    if (!cosine) {
        return SimilarityMatrix(w.rows(), nn::gram_rows(w));
    }
    nn::Tensor<double> unit(w.rows(), w.cols());
    for (std::size_t r = 0; r < w.rows(); ++r) {
        double norm = 0.0;
        for (T v : w.row(r)) {
            norm += static_cast<double>(v) * static_cast<double>(v);
        }
        norm = std::sqrt(norm);
        for (std::size_t c = 0; c < w.cols(); ++c) {
            unit(r, c) = norm > 0.0 ? static_cast<double>(w(r, c)) / norm : 0.0;
        }
    }
    return SimilarityMatrix(w.rows(), nn::gram_rows(unit));
}

template SimilarityMatrix SimilarityMatrix::from_rows(nn::Tensor<float> const&, bool);
template SimilarityMatrix SimilarityMatrix::from_rows(nn::Tensor<double> const&, bool);

double SimilarityMatrix::at(std::size_t i, std::size_t j) const {
    if (i >= n_ || j >= n_) {
        throw IndexError("attribute index (" + std::to_string(i) + ", " + std::to_string(j) + ") out of range for K=" +
                         std::to_string(n_));
    }
    return (*this)(i, j);
}

double SimilarityMatrix::max_abs() const {
    double m = 0.0;
    for (double v : values_) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

double SimilarityMatrix::min() const {
    return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end());
}

bool SimilarityMatrix::is_symmetric() const {
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = i + 1; j < n_; ++j) {
            if ((*this)(i, j) != (*this)(j, i)) {
                return false;
            }
        }
    }
    return true;
}

void SimilarityMatrix::write_csv(std::ostream& out) const {
    char buf[32];
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = 0; j < n_; ++j) {
            auto const res = std::to_chars(buf, buf + sizeof buf, (*this)(i, j));
            if (j > 0) {
                out << ',';
            }
            out.write(buf, res.ptr - buf);
        }
        out << '\n';
    }
}

SimilarityMatrix SimilarityMatrix::read_csv(std::istream& in) {
    std::vector<double> values;
    std::size_t rows = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        ++rows;
        char const* p = line.data();
        char const* end = p + line.size();
        while (p < end) {
            double v = 0.0;
            auto const res = std::from_chars(p, end, v);
            if (res.ec != std::errc{}) {
                throw ParseError("similarity csv line " + std::to_string(rows) + ": bad number");
            }
            values.push_back(v);
            p = res.ptr;
            if (p < end && *p == ',') {
                ++p;
            }
        }
    }
    return SimilarityMatrix(rows, std::move(values));
}

}  // namespace discrimq
