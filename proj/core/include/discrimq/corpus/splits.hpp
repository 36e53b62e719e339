#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "discrimq/corpus/region.hpp"

namespace discrimq::corpus {

enum class Split { train, val, test };

std::string split_name(Split s);

struct SplitRatios {
    double train = 0.70;
    double val = 0.15;
    double test = 0.15;
};

/// Whole images go to one split, so all regions (and questions) of an image
/// share it.
struct SplitAssignment {
    std::map<std::string, Split> by_image;
    std::array<std::size_t, 3> sizes{};

    [[nodiscard]] Split of_image(std::string const& image_id) const;
    [[nodiscard]] bool contains(std::string const& image_id) const { return by_image.contains(image_id); }
    [[nodiscard]] nlohmann::json to_json() const;
    static SplitAssignment from_json(nlohmann::json const& j);

    friend bool operator==(SplitAssignment const&, SplitAssignment const&) = default;
};

/// Split sizes by the largest-remainder rule; earlier splits win remainder ties.
std::array<std::size_t, 3> split_sizes(std::size_t n, SplitRatios const& ratios);

/// Shuffles the sorted, de-duplicated image ids with `seed` and cuts them by
/// split_sizes.
SplitAssignment make_splits(std::span<std::string const> image_ids, SplitRatios const& ratios, std::uint64_t seed);
SplitAssignment make_splits(CorpusStore const& store, SplitRatios const& ratios, std::uint64_t seed);

}  // namespace discrimq::corpus
