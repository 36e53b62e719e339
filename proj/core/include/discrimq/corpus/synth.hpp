#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "discrimq/corpus/region.hpp"

namespace discrimq::corpus {

/// One attribute family of the micro-world, e.g. colors.
///
/// Templates use "<obj>" / "<objs>" for the region's category noun and
/// "<value>" for the family value. `value_tags` holds the gold part-of-speech
/// tags of each value, space separated per token ("IN NN").
struct AttributeFamily {
    std::string name;
    std::vector<std::string> values;
    std::vector<std::string> value_tags;
    std::vector<std::string> question_templates;
    std::string description_template;
};

struct SynthConfig {
    std::vector<AttributeFamily> families;
    /// Family whose value is the object category; evaluation pairs never
    /// differ in it. None means pairs may differ in any family.
    std::optional<std::size_t> category_family;
    double noise_sigma = 0.05;
    std::size_t num_images = 400;
    std::size_t max_regions_per_image = 3;
    std::size_t num_pairs = 200;
    /// Probability that a reference template is kept in a pair's rated set.
    double reference_keep = 0.8;

    /// 6 colors, 5 actions, 2 counts, 4 locations, 8 object nouns.
    static SynthConfig defaults();
    [[nodiscard]] std::size_t feature_dim() const;
};

/// Ground truth recorded by the generator.
struct SynthTruth {
    std::vector<std::string> family_names;
    /// region_id -> value index per family.
    std::map<std::string, std::vector<std::size_t>> region_values;
    struct PairTruth {
        std::size_t family = 0;
        std::size_t value_a = 0;
        std::size_t value_b = 0;
    };
    std::map<std::string, PairTruth> pairs;
};

struct SynthWorld {
    CorpusStore store;
    SynthTruth truth;
};

/// Builds the micro-world. Throws ConfigError for an empty family list.
SynthWorld synth_microworld(SynthConfig const& config, std::uint64_t seed);

void dump_truth(std::ostream& out, SynthConfig const& config, SynthTruth const& truth);

/// Fills a template: "<obj>" -> noun, "<objs>" -> noun + "s", "<value>" -> value.
std::string instantiate_template(std::string const& tmpl, std::string const& noun, std::string const& value = {});

/// Index of the family whose question templates produce `question_tokens`
/// for some category noun, if any.
std::optional<std::size_t> question_family(SynthConfig const& config, std::vector<std::string> const& question_tokens);

/// Family owning an attribute expression: the family one of whose values
/// contains the expression as a contiguous token run.
std::optional<std::size_t> attribute_family(SynthConfig const& config, std::vector<std::string> const& expression);

struct TaggedToken {
    std::string token;
    std::string tag;
};

/// Tokens of generated descriptions and questions with the generator's own
/// part-of-speech tags.
std::vector<TaggedToken> synth_tagged_sample(SynthConfig const& config, std::size_t num_tokens, std::uint64_t seed);

}  // namespace discrimq::corpus
