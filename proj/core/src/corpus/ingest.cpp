#include "discrimq/corpus/ingest.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "discrimq/errors.hpp"

namespace discrimq::corpus {

using nlohmann::json;

std::string profile_name(Profile p) {
    return p == Profile::real ? "real" : "synthetic";
}

Profile parse_profile(std::string const& name) {
    if (name == "real") {
        return Profile::real;
    }
    if (name == "synthetic") {
        return Profile::synthetic;
    }
    throw ConfigError("unknown profile '" + name + "' (expected real or synthetic)");
}

std::size_t default_feature_dim(Profile p) {
    return p == Profile::real ? 2048 : 25;
}

namespace {

json const& required(json const& obj, char const* key, std::size_t line, char const* file) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw ParseError(std::string(file) + " line " + std::to_string(line) + ": missing required field '" + key +
                         "'");
    }
    return *it;
}

template <typename T>
T get_as(json const& j, char const* key, std::size_t line, char const* file) {
    try {
        return j.get<T>();
    } catch (json::exception const&) {
        throw ParseError(std::string(file) + " line " + std::to_string(line) + ": field '" + key +
                         "' has the wrong type");
    }
}

json parse_line(std::string const& text, std::size_t line, char const* file) {
    try {
        json j = json::parse(text);
        if (!j.is_object()) {
            throw ParseError(std::string(file) + " line " + std::to_string(line) + ": expected a JSON object");
        }
        return j;
    } catch (json::parse_error const& ex) {
        throw ParseError(std::string(file) + " line " + std::to_string(line) + ": " + ex.what());
    }
}

bool is_blank(std::string const& s) {
    return s.find_first_not_of(" \t\r\n") == std::string::npos;
}

}  // namespace

IngestResult ingest_streams(std::istream& regions, std::istream* pairs, IngestOptions const& options) {
    IngestResult result;
    auto& report = result.report;
    std::string text;
    std::size_t line = 0;
    while (std::getline(regions, text)) {
        ++line;
        if (is_blank(text)) {
            continue;
        }
        json const j = parse_line(text, line, "regions.jsonl");
        RegionRecord r;
        r.region_id = get_as<std::string>(required(j, "region_id", line, "regions.jsonl"), "region_id", line,
                                          "regions.jsonl");
        r.image_id =
            get_as<std::string>(required(j, "image_id", line, "regions.jsonl"), "image_id", line, "regions.jsonl");
        auto const box = get_as<std::vector<double>>(required(j, "bbox", line, "regions.jsonl"), "bbox", line,
                                                     "regions.jsonl");
        auto const size = get_as<std::vector<double>>(required(j, "image_size", line, "regions.jsonl"),
                                                      "image_size", line, "regions.jsonl");
        r.feature_region = get_as<std::vector<double>>(required(j, "feature_region", line, "regions.jsonl"),
                                                       "feature_region", line, "regions.jsonl");
        r.feature_image = get_as<std::vector<double>>(required(j, "feature_image", line, "regions.jsonl"),
                                                      "feature_image", line, "regions.jsonl");
        if (box.size() != 4 || size.size() != 2) {
            throw ParseError("regions.jsonl line " + std::to_string(line) + ": bbox needs 4 and image_size 2 numbers");
        }
        r.bbox = {box[0], box[1], box[2], box[3]};
        r.image_size = {size[0], size[1]};
        if (auto it = j.find("questions"); it != j.end()) {
            for (auto const& q : *it) {
                r.questions.push_back({get_as<std::string>(required(q, "text", line, "regions.jsonl"), "text", line,
                                                           "regions.jsonl"),
                                       get_as<std::string>(required(q, "answer", line, "regions.jsonl"), "answer",
                                                           line, "regions.jsonl")});
            }
        }
        if (auto it = j.find("descriptions"); it != j.end()) {
            r.descriptions = get_as<std::vector<std::string>>(*it, "descriptions", line, "regions.jsonl");
        }
        if (auto it = j.find("category"); it != j.end() && !it->is_null()) {
            r.category = get_as<std::string>(*it, "category", line, "regions.jsonl");
        }

        std::string const where = "regions.jsonl line " + std::to_string(line) + " (" + r.region_id + ")";
        if (r.feature_region.size() != options.feature_dim || r.feature_image.size() != options.feature_dim) {
            std::string const msg = where + ": feature length " + std::to_string(r.feature_region.size()) + "/" +
                                    std::to_string(r.feature_image.size()) + " does not match profile dimension " +
                                    std::to_string(options.feature_dim);
            if (options.strict_schema) {
                throw SchemaError(msg);
            }
            ++report.regions_rejected;
            report.messages.push_back(msg);
            continue;
        }
        if (!(r.image_size.width * r.image_size.height > 0) || !is_valid_box(r.bbox, r.image_size)) {
            ++report.regions_rejected;
            report.messages.push_back(where + ": malformed bounding box");
            continue;
        }
        if (result.store.find_region(r.region_id) != nullptr) {
            ++report.regions_rejected;
            report.messages.push_back(where + ": duplicate region_id");
            continue;
        }
        r.location = compute_location_vector(r.bbox, r.image_size);
        result.store.add_region(std::move(r));
        ++report.regions_accepted;
    }

    if (pairs == nullptr) {
        return result;
    }
    line = 0;
    while (std::getline(*pairs, text)) {
        ++line;
        if (is_blank(text)) {
            continue;
        }
        json const j = parse_line(text, line, "pairs.jsonl");
        EvalPair p;
        p.pair_id = get_as<std::string>(required(j, "pair_id", line, "pairs.jsonl"), "pair_id", line, "pairs.jsonl");
        p.region_a =
            get_as<std::string>(required(j, "region_a", line, "pairs.jsonl"), "region_a", line, "pairs.jsonl");
        p.region_b =
            get_as<std::string>(required(j, "region_b", line, "pairs.jsonl"), "region_b", line, "pairs.jsonl");
        for (auto const& ref : required(j, "references", line, "pairs.jsonl")) {
            p.references.push_back(
                {get_as<std::string>(required(ref, "text", line, "pairs.jsonl"), "text", line, "pairs.jsonl"),
                 parse_rating(get_as<std::string>(required(ref, "rating", line, "pairs.jsonl"), "rating", line,
                                                  "pairs.jsonl"))});
        }
        std::string const where = "pairs.jsonl line " + std::to_string(line) + " (" + p.pair_id + ")";
        auto const* a = result.store.find_region(p.region_a);
        auto const* b = result.store.find_region(p.region_b);
        if (a == nullptr || b == nullptr) {
            ++report.pairs_rejected;
            report.messages.push_back(where + ": references an unknown or rejected region");
            continue;
        }
        if (p.references.empty()) {
            ++report.pairs_rejected;
            report.messages.push_back(where + ": no references");
            continue;
        }
        if (a->category && b->category && *a->category != *b->category) {
            ++report.pairs_rejected;
            report.messages.push_back(where + ": regions belong to different categories");
            continue;
        }
        result.store.add_pair(std::move(p));
        ++report.pairs_accepted;
    }
    return result;
}

IngestResult ingest_corpus(std::filesystem::path const& dir, IngestOptions const& options) {
    std::ifstream regions(dir / "regions.jsonl");
    if (!regions) {
        throw InputError("cannot open " + (dir / "regions.jsonl").string());
    }
    std::ifstream pairs(dir / "pairs.jsonl");
    return ingest_streams(regions, pairs ? &pairs : nullptr, options);
}

void dump_regions(std::ostream& out, CorpusStore const& store) {
    for (auto const& r : store.regions()) {
        json j;
        j["region_id"] = r.region_id;
        j["image_id"] = r.image_id;
        j["bbox"] = {r.bbox.x_tl, r.bbox.y_tl, r.bbox.x_br, r.bbox.y_br};
        j["image_size"] = {r.image_size.width, r.image_size.height};
        j["feature_region"] = r.feature_region;
        j["feature_image"] = r.feature_image;
        auto& qs = j["questions"] = json::array();
        for (auto const& q : r.questions) {
            qs.push_back({{"text", q.text}, {"answer", q.answer}});
        }
        j["descriptions"] = r.descriptions;
        if (r.category) {
            j["category"] = *r.category;
        }
        out << j.dump() << '\n';
    }
}

void dump_pairs(std::ostream& out, CorpusStore const& store) {
    for (auto const& p : store.pairs()) {
        json j;
        j["pair_id"] = p.pair_id;
        j["region_a"] = p.region_a;
        j["region_b"] = p.region_b;
        auto& refs = j["references"] = json::array();
        for (auto const& ref : p.references) {
            refs.push_back({{"text", ref.text}, {"rating", rating_name(ref.rating)}});
        }
        out << j.dump() << '\n';
    }
}

void dump_corpus(std::filesystem::path const& dir, CorpusStore const& store) {
    std::filesystem::create_directories(dir);
    std::ofstream regions(dir / "regions.jsonl", std::ios::trunc);
    std::ofstream pairs(dir / "pairs.jsonl", std::ios::trunc);
    if (!regions || !pairs) {
        throw InputError("cannot write corpus files under " + dir.string());
    }
    dump_regions(regions, store);
    dump_pairs(pairs, store);
}

}  // namespace discrimq::corpus
