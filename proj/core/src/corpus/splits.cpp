#include "discrimq/corpus/splits.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "discrimq/errors.hpp"
#include "discrimq/rng.hpp"

namespace discrimq::corpus {

std::string split_name(Split s) {
    switch (s) {
    case Split::train:
        return "train";
    case Split::val:
        return "val";
    case Split::test:
        return "test";
    }
    return "test";
}

Split SplitAssignment::of_image(std::string const& image_id) const {
    auto it = by_image.find(image_id);
    if (it == by_image.end()) {
        throw IndexError("image '" + image_id + "' has no split assignment");
    }
    return it->second;
}

nlohmann::json SplitAssignment::to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (auto const& [image, split] : by_image) {
        j[image] = split_name(split);
    }
    return j;
}

SplitAssignment SplitAssignment::from_json(nlohmann::json const& j) {
    SplitAssignment out;
    for (auto const& [image, name] : j.items()) {
        auto const s = name.get<std::string>();
        Split split = s == "train" ? Split::train : s == "val" ? Split::val : s == "test" ? Split::test : throw SchemaError("unknown split '" + s + "'");
        out.by_image.emplace(image, split);
        ++out.sizes[static_cast<std::size_t>(split)];
    }
    return out;
}

std::array<std::size_t, 3> split_sizes(std::size_t n, SplitRatios const& ratios) {
    std::array<double, 3> const r = {ratios.train, ratios.val, ratios.test};
    double const total = r[0] + r[1] + r[2];
    if (std::any_of(r.begin(), r.end(), [](double x) { return x < 0; }) || std::abs(total - 1.0) > 1e-9) {
        throw ConfigError("split ratios must be non-negative and sum to 1");
    }
    std::array<std::size_t, 3> sizes{};
    std::array<double, 3> remainder{};
    std::size_t assigned = 0;
    for (std::size_t k = 0; k < 3; ++k) {
        double const quota = r[k] * static_cast<double>(n);
        sizes[k] = static_cast<std::size_t>(std::floor(quota + 1e-9));
        remainder[k] = quota - static_cast<double>(sizes[k]);
        assigned += sizes[k];
    }
    std::array<std::size_t, 3> order = {0, 1, 2};
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b] + 1e-12; });
    for (std::size_t k = 0; assigned < n; ++k) {
        ++sizes[order[k % 3]];
        ++assigned;
    }
    return sizes;
}

SplitAssignment make_splits(std::span<std::string const> image_ids, SplitRatios const& ratios, std::uint64_t seed) {
    std::vector<std::string> ids(image_ids.begin(), image_ids.end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    Rng rng(seed);
    rng.shuffle(ids);

    SplitAssignment out;
    out.sizes = split_sizes(ids.size(), ratios);
    std::size_t pos = 0;
    for (std::size_t k = 0; k < 3; ++k) {
        for (std::size_t i = 0; i < out.sizes[k]; ++i) {
            out.by_image.emplace(ids[pos++], static_cast<Split>(k));
        }
    }
    return out;
}

SplitAssignment make_splits(CorpusStore const& store, SplitRatios const& ratios, std::uint64_t seed) {
    auto const ids = store.image_ids();
    return make_splits(std::span<std::string const>(ids), ratios, seed);
}

}  // namespace discrimq::corpus
