#include "discrimq/corpus/region.hpp"

#include <set>

#include "discrimq/errors.hpp"

namespace discrimq::corpus {

bool is_valid_box(BoundingBox const& box, ImageSize const& size) {
    return 0 <= box.x_tl && box.x_tl < box.x_br && box.x_br <= size.width && 0 <= box.y_tl &&
           box.y_tl < box.y_br && box.y_br <= size.height;
}

LocationVector compute_location_vector(BoundingBox const& box, ImageSize const& size) {
    double const image_area = size.width * size.height;
    if (!(image_area > 0)) {
        throw DomainError("image has zero area");
    }
    if (!is_valid_box(box, size)) {
        throw DomainError("bounding box outside the image or empty");
    }
    double const box_area = (box.x_br - box.x_tl) * (box.y_br - box.y_tl);
    return {box.x_tl / size.width, box.y_tl / size.height, box.x_br / size.width, box.y_br / size.height,
            box_area / image_area};
}

std::size_t representation_dim(std::size_t feature_dim) {
    return 2 * feature_dim + 5;
}

std::vector<float> region_representation(RegionRecord const& region) {
    std::vector<float> f;
    f.reserve(region.feature_region.size() + region.feature_image.size() + 5);
    for (double v : region.feature_region) {
        f.push_back(static_cast<float>(v));
    }
    for (double v : region.feature_image) {
        f.push_back(static_cast<float>(v));
    }
    for (double v : region.location) {
        f.push_back(static_cast<float>(v));
    }
    return f;
}

double rating_weight(Rating r) {
    switch (r) {
    case Rating::strong_pos:
        return 1.0;
    case Rating::weak_pos:
        return 0.5;
    case Rating::neg:
        return -0.5;
    }
    return 0.0;
}

std::string rating_name(Rating r) {
    switch (r) {
    case Rating::strong_pos:
        return "strong_pos";
    case Rating::weak_pos:
        return "weak_pos";
    case Rating::neg:
        return "neg";
    }
    return "neg";
}

Rating parse_rating(std::string const& name) {
    if (name == "strong_pos") {
        return Rating::strong_pos;
    }
    if (name == "weak_pos") {
        return Rating::weak_pos;
    }
    if (name == "neg") {
        return Rating::neg;
    }
    throw ParseError("unknown rating '" + name + "'");
}

void CorpusStore::add_region(RegionRecord region) {
    if (region_index_.contains(region.region_id)) {
        throw SchemaError("duplicate region_id '" + region.region_id + "'");
    }
    region_index_.emplace(region.region_id, regions_.size());
    regions_.push_back(std::move(region));
}

void CorpusStore::add_pair(EvalPair pair) {
    if (find_region(pair.region_a) == nullptr || find_region(pair.region_b) == nullptr) {
        throw SchemaError("pair '" + pair.pair_id + "' references an unknown region");
    }
    if (pair.references.empty()) {
        throw SchemaError("pair '" + pair.pair_id + "' has no references");
    }
    pairs_.push_back(std::move(pair));
}

RegionRecord const* CorpusStore::find_region(std::string const& id) const {
    auto it = region_index_.find(id);
    return it == region_index_.end() ? nullptr : &regions_[it->second];
}

RegionRecord const& CorpusStore::region(std::string const& id) const {
    auto const* r = find_region(id);
    if (r == nullptr) {
        throw IndexError("unknown region '" + id + "'");
    }
    return *r;
}

std::vector<std::string> CorpusStore::image_ids() const {
    std::set<std::string> ids;
    for (auto const& r : regions_) {
        ids.insert(r.image_id);
    }
    return {ids.begin(), ids.end()};
}

}  // namespace discrimq::corpus
