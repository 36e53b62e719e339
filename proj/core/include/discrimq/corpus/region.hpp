#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace discrimq::corpus {

struct BoundingBox {
    double x_tl = 0;
    double y_tl = 0;
    double x_br = 0;
    double y_br = 0;
    friend bool operator==(BoundingBox const&, BoundingBox const&) = default;
};

struct ImageSize {
    double width = 0;
    double height = 0;
    friend bool operator==(ImageSize const&, ImageSize const&) = default;
};

using LocationVector = std::array<double, 5>;

/// [x_tl/W, y_tl/H, x_br/W, y_br/H, S_r/S_I]. Throws DomainError for a
/// zero-area image or a box violating 0 <= tl < br <= size.
LocationVector compute_location_vector(BoundingBox const& box, ImageSize const& size);

[[nodiscard]] bool is_valid_box(BoundingBox const& box, ImageSize const& size);

struct QuestionAnswer {
    std::string text;
    std::string answer;
    friend bool operator==(QuestionAnswer const&, QuestionAnswer const&) = default;
};

struct RegionRecord {
    std::string region_id;
    std::string image_id;
    BoundingBox bbox;
    ImageSize image_size;
    std::vector<double> feature_region;
    std::vector<double> feature_image;
    LocationVector location{};
    std::vector<QuestionAnswer> questions;
    std::vector<std::string> descriptions;
    std::optional<std::string> category;

    friend bool operator==(RegionRecord const&, RegionRecord const&) = default;
};

/// Model input f = [feature_region, feature_image, location].
std::vector<float> region_representation(RegionRecord const& region);
std::size_t representation_dim(std::size_t feature_dim);

enum class Rating { strong_pos, weak_pos, neg };

/// 1.0, 0.5, -0.5.
double rating_weight(Rating r);
std::string rating_name(Rating r);
Rating parse_rating(std::string const& name);

struct RatedReference {
    std::string text;
    Rating rating = Rating::strong_pos;
    friend bool operator==(RatedReference const&, RatedReference const&) = default;
};

struct EvalPair {
    std::string pair_id;
    std::string region_a;
    std::string region_b;
    std::vector<RatedReference> references;
    friend bool operator==(EvalPair const&, EvalPair const&) = default;
};

/// Indexed regions and evaluation pairs; immutable once ingested.
class CorpusStore {
  public:
    void add_region(RegionRecord region);
    void add_pair(EvalPair pair);

    [[nodiscard]] std::vector<RegionRecord> const& regions() const noexcept { return regions_; }
    [[nodiscard]] std::vector<EvalPair> const& pairs() const noexcept { return pairs_; }
    [[nodiscard]] RegionRecord const* find_region(std::string const& id) const;
    [[nodiscard]] RegionRecord const& region(std::string const& id) const;
    [[nodiscard]] std::vector<std::string> image_ids() const;

    friend bool operator==(CorpusStore const& a, CorpusStore const& b) {
        return a.regions_ == b.regions_ && a.pairs_ == b.pairs_;
    }

  private:
    std::vector<RegionRecord> regions_;
    std::vector<EvalPair> pairs_;
    std::map<std::string, std::size_t> region_index_;
};

}  // namespace discrimq::corpus
