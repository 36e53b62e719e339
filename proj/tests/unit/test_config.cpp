#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "discrimq/app/config.hpp"
#include "discrimq/errors.hpp"

using namespace discrimq;
using namespace discrimq::app;
namespace fs = std::filesystem;

namespace {

fs::path scratch(std::string const& name) {
    auto dir = fs::temp_directory_path() / ("discrimq_config_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("profile defaults") {
    auto const syn = default_config(corpus::Profile::synthetic);
    CHECK(syn.attributes.k == 612);
    CHECK(syn.attributes.hidden == 64);
    CHECK(syn.selector.top_k == 5);
    CHECK(syn.beam.width == 5);
    CHECK(syn.retrieval_k == 100);
    CHECK(syn.attributes.schedule.batch == 50);
    CHECK(syn.selector.tune);

    auto const real = default_config(corpus::Profile::real);
    CHECK(real.attributes.hidden == 512);
    CHECK(real.vqa.embed == 300);
    CHECK(real.qgen.schedule.epochs == 30);
    CHECK_FALSE(real.selector.tune);
    CHECK(real.data.pair_validation == 0.0);
}

TEST_CASE("JSON round trip is lossless") {
    for (auto p : {corpus::Profile::synthetic, corpus::Profile::real}) {
        auto c = default_config(p);
        c.selector.alpha = 0.25;
        c.paths.out = "/tmp/x";
        CHECK(from_json(to_json(c)) == c);
    }
}

TEST_CASE("overrides are typed by the existing value") {
    auto const c = load_config({}, {{"selector.alpha", "0"}, {"beam.width", "3"}, {"paths.out", "123"}});
    CHECK(c.selector.alpha == 0.0);
    CHECK(c.beam.width == 3);
    CHECK(c.paths.out == "123");
    CHECK(load_config({}, {{"profile", "real"}}).profile == corpus::Profile::real);
}

TEST_CASE("unknown keys and bad values are rejected") {
    CHECK_THROWS_AS(load_config({}, {{"selector.gamma", "1"}}), ConfigError);
    CHECK_THROWS_AS(load_config({}, {{"selector", "1"}}), ConfigError);
    CHECK_THROWS_AS(load_config({}, {{"beam.width", "0"}}), ConfigError);
    CHECK_THROWS_AS(load_config({}, {{"selector.alpha", "-1"}}), ConfigError);
    CHECK_THROWS_AS(load_config({}, {{"profile", "huge"}}), ConfigError);

    auto const dir = scratch("unknown");
    std::ofstream(dir / "c.json") << R"({"selector": {"alpha": 2, "typo": 1}})";
    try {
        load_config(dir / "c.json", {});
        FAIL("expected ConfigError");
    } catch (ConfigError const& e) {
        CHECK(std::string(e.what()).find("typo") != std::string::npos);
    }
    fs::remove_all(dir);
}

TEST_CASE("a missing config file names its path") {
    try {
        load_config("/nonexistent/discrimq.json", {});
        FAIL("expected ConfigError");
    } catch (ConfigError const& e) {
        CHECK(std::string(e.what()).find("/nonexistent/discrimq.json") != std::string::npos);
    }
}

TEST_CASE("file values sit between defaults and overrides") {
    auto const dir = scratch("layers");
    std::ofstream(dir / "c.json") << R"({"selector": {"alpha": 2, "beta": 0.5}, "seed": 3})";
    auto const c = load_config(dir / "c.json", {{"selector.beta", "0.25"}});
    CHECK(c.selector.alpha == 2.0);
    CHECK(c.selector.beta == 0.25);
    CHECK(c.seed == 3);
    CHECK(c.beam.width == 5);
    fs::remove_all(dir);
}

TEST_CASE("the echoed config reflects overrides") {
    auto const dir = scratch("echo");
    auto const c = load_config({}, {{"selector.alpha", "0"}, {"paths.out", dir.string()}});
    echo_config(c, "select");
    std::ifstream in(dir / "config.select.json");
    auto const j = nlohmann::json::parse(in);
    CHECK(j["selector"]["alpha"] == 0.0);
    CHECK(from_json(j) == c);
    fs::remove_all(dir);
}
