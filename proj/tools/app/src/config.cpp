#include "discrimq/app/config.hpp"

#include <cstdlib>
#include <fstream>

#include "discrimq/errors.hpp"
#include "discrimq/pairselect/pair_selector.hpp"
#include "discrimq/qgen/generator.hpp"

namespace discrimq::app {

namespace {

using nlohmann::json;

json schedule_json(Schedule const& s) {
    return {{"epochs", s.epochs}, {"batch", s.batch}, {"lr", s.lr}, {"clip", s.clip}};
}

Schedule schedule_from(json const& j) {
    return {j.at("epochs").get<std::size_t>(), j.at("batch").get<std::size_t>(), j.at("lr").get<double>(),
            j.at("clip").get<double>()};
}

// Merges `patch` into `base`, refusing keys the base does not have.
void merge_known(json& base, json const& patch, std::string const& prefix) {
    if (!patch.is_object()) {
        throw ConfigError("config " + (prefix.empty() ? std::string("root") : "key '" + prefix + "'") +
                          " must be an object");
    }
    for (auto const& [key, value] : patch.items()) {
        std::string const path = prefix.empty() ? key : prefix + "." + key;
        if (!base.contains(key)) {
            throw ConfigError("unknown config key '" + path + "'");
        }
        if (base[key].is_object()) {
            merge_known(base[key], value, path);
        } else {
            base[key] = value;
        }
    }
}

void set_dotted(json& tree, std::string const& dotted, json value) {
    json* node = &tree;
    std::size_t start = 0;
    for (;;) {
        std::size_t const dot = dotted.find('.', start);
        std::string const key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (!node->is_object() || !node->contains(key)) {
            throw ConfigError("unknown config key '" + dotted + "'");
        }
        node = &(*node)[key];
        if (dot == std::string::npos) {
            break;
        }
        start = dot + 1;
    }
    if (node->is_object()) {
        throw ConfigError("config key '" + dotted + "' is a section, not a value");
    }
    *node = std::move(value);
}

json parse_override(std::string const& text) {
    auto j = json::parse(text, nullptr, false);
    if (j.is_discarded()) {
        return text;
    }
    return j;
}

}  // namespace

nn::TrainSchedule Schedule::to_train() const {
    nn::TrainSchedule s;
    s.epochs = epochs;
    s.batch_size = batch;
    s.adam.lr = lr;
    s.clip_norm = clip;
    return s;
}

std::filesystem::path RunConfig::corpus_dir() const {
    return paths.corpus.empty() ? out_dir() / "corpus" : std::filesystem::path(paths.corpus);
}

void RunConfig::validate() const {
    pairselect::SelectorConfig sel{selector.alpha, selector.beta, selector.top_k, pairselect::parse_mode(selector.mode)};
    sel.validate();
    if (method != "all") {
        (void)qgen::parse_method(method);
    }
    if (beam.width == 0 || beam.max_len == 0) {
        throw ConfigError("beam.width and beam.max_len must be positive");
    }
    if (data.pair_validation < 0.0 || data.pair_validation >= 1.0) {
        throw ConfigError("data.pair_validation must be in [0, 1)");
    }
    if (retrieval_k == 0) {
        throw ConfigError("retrieval_k must be positive");
    }
    for (auto const* s : {&attributes.schedule, &vqa.schedule, &qgen.schedule}) {
        if (s->batch == 0 || !(s->lr > 0.0) || !(s->clip > 0.0)) {
            throw ConfigError("training schedules need positive batch, lr and clip");
        }
    }
    if (qgen.layers == 0) {
        throw ConfigError("qgen.layers must be positive");
    }
}

RunConfig default_config(corpus::Profile profile) {
    RunConfig c;
    c.profile = profile;
    if (profile == corpus::Profile::real) {
        c.data.min_freq = 5;
        c.data.pair_validation = 0.0;
        c.attributes.hidden = 512;
        c.vqa.embed = 300;
        c.vqa.hidden = 512;
        c.qgen.embed = 512;
        c.qgen.hidden = 512;
        c.selector.tune = false;
    } else {
        c.qgen.schedule.epochs = 60;
        c.qgen.schedule.lr = 3e-3;
    }
    return c;
}

json to_json(RunConfig const& c) {
    return {
        {"profile", corpus::profile_name(c.profile)},
        {"seed", c.seed},
        {"paths", {{"corpus", c.paths.corpus}, {"out", c.paths.out}, {"embeddings", c.paths.embeddings}}},
        {"synth",
         {{"images", c.synth.images},
          {"pairs", c.synth.pairs},
          {"max_regions", c.synth.max_regions},
          {"noise", c.synth.noise},
          {"reference_keep", c.synth.reference_keep}}},
        {"data",
         {{"strict_schema", c.data.strict_schema},
          {"min_freq", c.data.min_freq},
          {"max_len", c.data.max_len},
          {"train", c.data.train},
          {"val", c.data.val},
          {"test", c.data.test},
          {"pair_validation", c.data.pair_validation}}},
        {"attributes",
         {{"k", c.attributes.k},
          {"answer_top_n", c.attributes.answer_top_n},
          {"hidden", c.attributes.hidden},
          {"cosine", c.attributes.cosine},
          {"schedule", schedule_json(c.attributes.schedule)}}},
        {"vqa", {{"embed", c.vqa.embed}, {"hidden", c.vqa.hidden}, {"schedule", schedule_json(c.vqa.schedule)}}},
        {"qgen",
         {{"embed", c.qgen.embed},
          {"hidden", c.qgen.hidden},
          {"layers", c.qgen.layers},
          {"att_dim", c.qgen.att_dim},
          {"schedule", schedule_json(c.qgen.schedule)}}},
        {"selector",
         {{"alpha", c.selector.alpha},
          {"beta", c.selector.beta},
          {"top_k", c.selector.top_k},
          {"mode", c.selector.mode},
          {"tune", c.selector.tune},
          {"grid", c.selector.grid}}},
        {"beam", {{"width", c.beam.width}, {"max_len", c.beam.max_len}}},
        {"retrieval_k", c.retrieval_k},
        {"method", c.method},
        {"hard", c.hard},
    };
}

RunConfig from_json(json const& j) {
    try {
        RunConfig c = default_config(corpus::parse_profile(j.at("profile").get<std::string>()));
        json expected = to_json(c);
        merge_known(expected, j, "");
        c.seed = j.at("seed").get<std::uint64_t>();
        auto const& p = j.at("paths");
        c.paths = {p.at("corpus").get<std::string>(), p.at("out").get<std::string>(),
                   p.at("embeddings").get<std::string>()};
        auto const& s = j.at("synth");
        c.synth = {s.at("images").get<std::size_t>(), s.at("pairs").get<std::size_t>(),
                   s.at("max_regions").get<std::size_t>(), s.at("noise").get<double>(),
                   s.at("reference_keep").get<double>()};
        auto const& d = j.at("data");
        c.data = {d.at("strict_schema").get<bool>(), d.at("min_freq").get<std::size_t>(),
                  d.at("max_len").get<std::size_t>(),  d.at("train").get<double>(),
                  d.at("val").get<double>(),           d.at("test").get<double>(),
                  d.at("pair_validation").get<double>()};
        auto const& a = j.at("attributes");
        c.attributes = {a.at("k").get<std::size_t>(), a.at("answer_top_n").get<std::size_t>(),
                        a.at("hidden").get<std::size_t>(), a.at("cosine").get<bool>(),
                        schedule_from(a.at("schedule"))};
        auto const& v = j.at("vqa");
        c.vqa = {v.at("embed").get<std::size_t>(), v.at("hidden").get<std::size_t>(), schedule_from(v.at("schedule"))};
        auto const& q = j.at("qgen");
        c.qgen = {q.at("embed").get<std::size_t>(), q.at("hidden").get<std::size_t>(), q.at("layers").get<std::size_t>(),
                  q.at("att_dim").get<std::size_t>(), schedule_from(q.at("schedule"))};
        auto const& sel = j.at("selector");
        c.selector = {sel.at("alpha").get<double>(), sel.at("beta").get<double>(), sel.at("top_k").get<std::size_t>(),
                      sel.at("mode").get<std::string>(), sel.at("tune").get<bool>(),
                      sel.at("grid").get<std::vector<double>>()};
        auto const& b = j.at("beam");
        c.beam = {b.at("width").get<std::size_t>(), b.at("max_len").get<std::size_t>()};
        c.retrieval_k = j.at("retrieval_k").get<std::size_t>();
        c.method = j.at("method").get<std::string>();
        c.hard = j.at("hard").get<bool>();
        c.validate();
        return c;
    } catch (json::exception const& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
}

RunConfig load_config(std::filesystem::path const& path, Overrides const& overrides) {
    json file = json::object();
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) {
            throw ConfigError("cannot open config file " + path.string());
        }
        file = json::parse(in, nullptr, false, true);
        if (file.is_discarded()) {
            throw ConfigError("config file " + path.string() + " is not valid JSON");
        }
        if (file.is_null()) {
            file = json::object();
        }
        if (!file.is_object()) {
            throw ConfigError("config file " + path.string() + " must hold a JSON object");
        }
    }

    std::string profile = file.value("profile", std::string("synthetic"));
    if (auto it = overrides.find("profile"); it != overrides.end()) {
        profile = it->second;
    }
    json tree = to_json(default_config(corpus::parse_profile(profile)));
    merge_known(tree, file, "");
    if (char const* env = std::getenv("DISCRIMQ_OUT"); env != nullptr && *env != '\0') {
        tree["paths"]["out"] = env;
    }
    for (auto const& [key, value] : overrides) {
        json parsed = parse_override(value);
        auto const& current = [&]() -> json const& {
            json const* node = &tree;
            std::size_t start = 0;
            for (;;) {
                std::size_t const dot = key.find('.', start);
                std::string const k = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
                if (!node->is_object() || !node->contains(k)) {
                    throw ConfigError("unknown config key '" + key + "'");
                }
                node = &node->at(k);
                if (dot == std::string::npos) {
                    return *node;
                }
                start = dot + 1;
            }
        }();
        // Strings stay strings even when they look like JSON ("1" for a path).
        if (current.is_string()) {
            parsed = value;
        }
        set_dotted(tree, key, std::move(parsed));
    }
    return from_json(tree);
}

void echo_config(RunConfig const& config, std::string const& stage) {
    std::filesystem::create_directories(config.out_dir());
    std::ofstream out(config.out_dir() / ("config." + stage + ".json"));
    out << to_json(config).dump(2) << '\n';
}

}  // namespace discrimq::app
