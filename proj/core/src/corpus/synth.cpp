#include "discrimq/corpus/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include <nlohmann/json.hpp>

#include "discrimq/corpus/tokenizer.hpp"
#include "discrimq/errors.hpp"
#include "discrimq/rng.hpp"

namespace discrimq::corpus {

namespace {

// Gold tags for the fixed words the templates are built from.
std::map<std::string, std::string> const& template_word_tags() {
    static std::map<std::string, std::string> const tags = {
        {"what", "OTHER"},  {"color", "NN"},   {"is", "OTHER"},    {"the", "OTHER"},  {"of", "IN"},
        {"doing", "VB"},    {"does", "OTHER"}, {"do", "VB"},       {"how", "OTHER"},  {"many", "OTHER"},
        {"are", "OTHER"},   {"there", "OTHER"}, {"number", "NN"},  {"where", "OTHER"}, {"located", "VB"},
        {"this", "OTHER"},  {"kind", "NN"},    {"object", "NN"},   {"can", "OTHER"},  {"a", "OTHER"},
    };
    return tags;
}

std::string replace_all(std::string s, std::string const& from, std::string const& to) {
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
    return s;
}

double round6(double v) {
    return std::round(v * 1e6) / 1e6;
}

std::string numbered(char const* prefix, std::size_t n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%05zu", prefix, n);
    return buf;
}

struct Draft {
    std::vector<std::size_t> values;
};

std::vector<double> one_hot_features(SynthConfig const& config, std::vector<std::size_t> const& values) {
    std::vector<double> f;
    f.reserve(config.feature_dim());
    for (std::size_t fam = 0; fam < config.families.size(); ++fam) {
        for (std::size_t v = 0; v < config.families[fam].values.size(); ++v) {
            f.push_back(v == values[fam] ? 1.0 : 0.0);
        }
    }
    return f;
}

std::string category_noun(SynthConfig const& config, std::vector<std::size_t> const& values) {
    if (!config.category_family) {
        return "object";
    }
    return config.families[*config.category_family].values[values[*config.category_family]];
}

RegionRecord make_region(SynthConfig const& config, Rng& rng, std::string region_id, std::string image_id,
                         std::vector<std::size_t> const& values, std::vector<double> const& image_mean) {
    RegionRecord r;
    r.region_id = std::move(region_id);
    r.image_id = std::move(image_id);
    double const w = static_cast<double>(320 + rng.index(321));
    double const h = static_cast<double>(240 + rng.index(241));
    double const x0 = static_cast<double>(rng.index(static_cast<std::uint64_t>(w) - 32));
    double const y0 = static_cast<double>(rng.index(static_cast<std::uint64_t>(h) - 32));
    double const x1 = x0 + 16 + static_cast<double>(rng.index(static_cast<std::uint64_t>(w - x0) - 15));
    double const y1 = y0 + 16 + static_cast<double>(rng.index(static_cast<std::uint64_t>(h - y0) - 15));
    r.image_size = {w, h};
    r.bbox = {x0, y0, std::min(x1, w), std::min(y1, h)};
    r.location = compute_location_vector(r.bbox, r.image_size);

    auto const hot = one_hot_features(config, values);
    for (double v : hot) {
        r.feature_region.push_back(round6(v + config.noise_sigma * rng.normal()));
    }
    for (double v : image_mean) {
        r.feature_image.push_back(round6(v + config.noise_sigma * rng.normal()));
    }

    std::string const noun = category_noun(config, values);
    for (std::size_t fam = 0; fam < config.families.size(); ++fam) {
        auto const& family = config.families[fam];
        std::string const& value = family.values[values[fam]];
        auto const& tmpl = family.question_templates[rng.index(family.question_templates.size())];
        r.questions.push_back({instantiate_template(tmpl, noun), value});
    }
    for (std::size_t fam = 0; fam < config.families.size(); ++fam) {
        auto const& family = config.families[fam];
        r.descriptions.push_back(instantiate_template(family.description_template, noun, family.values[values[fam]]));
    }
    if (config.category_family) {
        r.category = noun;
    }
    return r;
}

std::vector<std::size_t> draw_values(SynthConfig const& config, Rng& rng) {
    std::vector<std::size_t> values;
    for (auto const& family : config.families) {
        values.push_back(rng.index(family.values.size()));
    }
    return values;
}

bool contains_run(std::vector<std::string> const& hay, std::vector<std::string> const& needle) {
    if (needle.empty() || needle.size() > hay.size()) {
        return false;
    }
    return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

}  // namespace

SynthConfig SynthConfig::defaults() {
    SynthConfig c;
    c.families = {
        {"color",
         {"red", "blue", "green", "yellow", "white", "black"},
         {"JJ", "JJ", "JJ", "JJ", "JJ", "JJ"},
         {"what color is the <obj>?", "what is the color of the <obj>?"},
         "the <obj> is <value>"},
        {"action",
         {"run", "sit", "stand", "sleep", "jump"},
         {"VB", "VB", "VB", "VB", "VB"},
         {"what is the <obj> doing?", "what does the <obj> do?"},
         "the <obj> can <value>"},
        {"count",
         {"one", "more_than_one"},
         {"CD", "CD"},
         {"how many <objs> are there?", "what is the number of <objs>?"},
         "there is <value> <obj>"},
        {"location",
         {"on grass", "in water", "on road", "in sky"},
         {"IN NN", "IN NN", "IN NN", "IN NN"},
         {"where is the <obj>?", "where is the <obj> located?"},
         "the <obj> is <value>"},
        {"object",
         {"dog", "cat", "horse", "car", "bird", "ball", "kite", "boat"},
         {"NN", "NN", "NN", "NN", "NN", "NN", "NN", "NN"},
         {"what is this?", "what kind of object is this?"},
         "this is a <value>"},
    };
    c.category_family = 4;
    return c;
}

std::size_t SynthConfig::feature_dim() const {
    std::size_t d = 0;
    for (auto const& f : families) {
        d += f.values.size();
    }
    return d;
}

std::string instantiate_template(std::string const& tmpl, std::string const& noun, std::string const& value) {
    std::string out = replace_all(tmpl, "<objs>", noun + "s");
    out = replace_all(out, "<obj>", noun);
    return replace_all(out, "<value>", value);
}

SynthWorld synth_microworld(SynthConfig const& config, std::uint64_t seed) {
    if (config.families.empty()) {
        throw ConfigError("synthetic world needs at least one attribute family");
    }
    for (auto const& f : config.families) {
        if (f.values.empty() || f.question_templates.empty()) {
            throw ConfigError("family '" + f.name + "' needs values and question templates");
        }
    }
    if (config.category_family && *config.category_family >= config.families.size()) {
        throw ConfigError("category family index out of range");
    }
    std::vector<std::size_t> varying;
    for (std::size_t fam = 0; fam < config.families.size(); ++fam) {
        if (!config.category_family || fam != *config.category_family) {
            if (config.families[fam].values.size() > 1) {
                varying.push_back(fam);
            }
        }
    }
    if (config.num_pairs > 0 && varying.empty()) {
        throw ConfigError("no family can vary between the two regions of a pair");
    }

    Rng rng(seed);
    SynthWorld world;
    for (auto const& f : config.families) {
        world.truth.family_names.push_back(f.name);
    }

    std::size_t const dim = config.feature_dim();
    for (std::size_t img = 0; img < config.num_images; ++img) {
        std::string const image_id = numbered("img_", img);
        std::size_t const n = 1 + rng.index(std::max<std::size_t>(config.max_regions_per_image, 1));
        std::vector<std::vector<std::size_t>> drafts;
        std::vector<double> mean(dim, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            drafts.push_back(draw_values(config, rng));
            auto const hot = one_hot_features(config, drafts.back());
            for (std::size_t d = 0; d < dim; ++d) {
                mean[d] += hot[d] / static_cast<double>(n);
            }
        }
        for (std::size_t k = 0; k < n; ++k) {
            std::string const region_id = image_id + "_r" + std::to_string(k);
            world.truth.region_values[region_id] = drafts[k];
            world.store.add_region(make_region(config, rng, region_id, image_id, drafts[k], mean));
        }
    }

    for (std::size_t p = 0; p < config.num_pairs; ++p) {
        std::string const pair_id = numbered("pair_", p);
        auto const values_a = draw_values(config, rng);
        std::size_t const fam = varying[rng.index(varying.size())];
        auto values_b = values_a;
        std::size_t const alt = rng.index(config.families[fam].values.size() - 1);
        values_b[fam] = alt >= values_a[fam] ? alt + 1 : alt;

        std::string const id_a = pair_id + "_a";
        std::string const id_b = pair_id + "_b";
        auto const hot_a = one_hot_features(config, values_a);
        auto const hot_b = one_hot_features(config, values_b);
        world.store.add_region(make_region(config, rng, id_a, numbered("pimg_a", p), values_a, hot_a));
        world.store.add_region(make_region(config, rng, id_b, numbered("pimg_b", p), values_b, hot_b));
        world.truth.region_values[id_a] = values_a;
        world.truth.region_values[id_b] = values_b;
        world.truth.pairs[pair_id] = {fam, values_a[fam], values_b[fam]};

        std::string const noun = category_noun(config, values_a);
        EvalPair pair{pair_id, id_a, id_b, {}};
        std::vector<RatedReference> positives;
        std::vector<RatedReference> negatives;
        for (std::size_t f = 0; f < config.families.size(); ++f) {
            for (auto const& tmpl : config.families[f].question_templates) {
                bool const keep = rng.uniform() < config.reference_keep;
                if (f == fam) {
                    Rating const rating = rng.uniform() < 0.75 ? Rating::strong_pos : Rating::weak_pos;
                    if (keep || positives.empty()) {
                        positives.push_back({instantiate_template(tmpl, noun), rating});
                    }
                } else if (keep) {
                    negatives.push_back({instantiate_template(tmpl, noun), Rating::neg});
                }
            }
        }
        pair.references = std::move(positives);
        pair.references.insert(pair.references.end(), negatives.begin(), negatives.end());
        world.store.add_pair(std::move(pair));
    }
    return world;
}

void dump_truth(std::ostream& out, SynthConfig const& config, SynthTruth const& truth) {
    for (auto const& [region, values] : truth.region_values) {
        nlohmann::json j;
        j["region_id"] = region;
        for (std::size_t fam = 0; fam < values.size(); ++fam) {
            j["values"][config.families[fam].name] = config.families[fam].values[values[fam]];
        }
        out << j.dump() << '\n';
    }
    for (auto const& [pair, t] : truth.pairs) {
        auto const& family = config.families[t.family];
        nlohmann::json j{{"pair_id", pair},
                         {"family", family.name},
                         {"value_a", family.values[t.value_a]},
                         {"value_b", family.values[t.value_b]}};
        out << j.dump() << '\n';
    }
}

std::optional<std::size_t> question_family(SynthConfig const& config, std::vector<std::string> const& question_tokens) {
    std::vector<std::string> nouns;
    if (config.category_family) {
        nouns = config.families[*config.category_family].values;
    } else {
        nouns = {"object"};
    }
    for (std::size_t fam = 0; fam < config.families.size(); ++fam) {
        for (auto const& tmpl : config.families[fam].question_templates) {
            for (auto const& noun : nouns) {
                if (tokenize(instantiate_template(tmpl, noun)) == question_tokens) {
                    return fam;
                }
            }
        }
    }
    return std::nullopt;
}

std::optional<std::size_t> attribute_family(SynthConfig const& config, std::vector<std::string> const& expression) {
    for (std::size_t fam = 0; fam < config.families.size(); ++fam) {
        for (auto const& value : config.families[fam].values) {
            if (contains_run(tokenize(value), expression)) {
                return fam;
            }
        }
    }
    return std::nullopt;
}

std::vector<TaggedToken> synth_tagged_sample(SynthConfig const& config, std::size_t num_tokens, std::uint64_t seed) {
    Rng rng(seed);
    std::map<std::string, std::string> gold = template_word_tags();
    for (auto const& family : config.families) {
        for (std::size_t v = 0; v < family.values.size(); ++v) {
            auto const tokens = tokenize(family.values[v]);
            auto const tags = tokenize(family.value_tags.size() > v ? family.value_tags[v] : std::string{},
                                       TokenizeOptions{false});
            for (std::size_t k = 0; k < tokens.size(); ++k) {
                std::string tag = k < tags.size() ? tags[k] : "NN";
                for (auto& ch : tag) {
                    ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
                }
                gold[tokens[k]] = tag;
            }
        }
    }
    if (config.category_family) {
        for (auto const& noun : config.families[*config.category_family].values) {
            gold[noun + "s"] = "NN";
        }
    }

    std::vector<TaggedToken> sample;
    while (sample.size() < num_tokens) {
        auto const values = draw_values(config, rng);
        std::string const noun = category_noun(config, values);
        std::size_t const fam = rng.index(config.families.size());
        auto const& family = config.families[fam];
        std::string const text =
            rng.uniform() < 0.5
                ? instantiate_template(family.description_template, noun, family.values[values[fam]])
                : instantiate_template(family.question_templates[rng.index(family.question_templates.size())], noun);
        for (auto const& token : tokenize(text)) {
            auto it = gold.find(token);
            sample.push_back({token, it == gold.end() ? "OTHER" : it->second});
            if (sample.size() == num_tokens) {
                break;
            }
        }
    }
    return sample;
}

}  // namespace discrimq::corpus
