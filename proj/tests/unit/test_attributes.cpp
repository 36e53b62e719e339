#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "discrimq/attributes/attr_model.hpp"
#include "discrimq/attributes/attribute_vocab.hpp"
#include "discrimq/attributes/pos_tagger.hpp"
#include "discrimq/corpus/synth.hpp"
#include "discrimq/corpus/tokenizer.hpp"
#include "discrimq/errors.hpp"
#include "discrimq/rng.hpp"

using namespace discrimq;
using namespace discrimq::attributes;

namespace {

using Tokens = std::vector<std::string>;

// Naive n-gram counter: every window of every text and answer, kept when its
// tags form a rule and it shares a token with some answer.
std::vector<std::pair<Tokens, std::size_t>> naive_top_k(std::vector<Tokens> const& texts,
                                                        std::vector<Tokens> const& answers,
                                                        std::vector<PosPattern> const& rules, std::size_t k) {
    std::set<std::string> answer_tokens;
    for (auto const& a : answers) {
        answer_tokens.insert(a.begin(), a.end());
    }
    std::map<Tokens, std::size_t> counts;
    std::vector<Tokens> all = texts;
    all.insert(all.end(), answers.begin(), answers.end());
    for (auto const& t : all) {
        for (std::size_t n = 1; n <= 3; ++n) {
            for (std::size_t s = 0; s + n <= t.size(); ++s) {
                Tokens window(t.begin() + s, t.begin() + s + n);
                PosPattern tags;
                for (auto const& w : window) {
                    tags.push_back(tag_token(w));
                }
                if (std::find(rules.begin(), rules.end(), tags) == rules.end()) {
                    continue;
                }
                bool shared = false;
                for (auto const& w : window) {
                    shared = shared || answer_tokens.contains(w);
                }
                if (shared) {
                    ++counts[window];
                }
            }
        }
    }
    std::vector<std::pair<Tokens, std::size_t>> ranked(counts.begin(), counts.end());
    std::sort(ranked.begin(), ranked.end(), [](auto const& x, auto const& y) {
        return x.second != y.second ? x.second > y.second : x.first < y.first;
    });
    if (ranked.size() > k) {
        ranked.resize(k);
    }
    return ranked;
}

double naive_average_precision(std::vector<double> const& scores, std::vector<int> const& labels) {
    std::vector<std::size_t> order(scores.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        order[k] = k;
    }
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });
    double hits = 0;
    double sum = 0;
    for (std::size_t r = 0; r < order.size(); ++r) {
        if (labels[order[r]]) {
            hits += 1;
            sum += hits / static_cast<double>(r + 1);
        }
    }
    return hits > 0 ? sum / hits : 0.0;
}

bool contains_run(Tokens const& hay, Tokens const& needle) {
    return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

}  // namespace

TEST_CASE("tagger lexicon and closed-class words") {
    CHECK(tag_token("white") == PosTag::JJ);
    CHECK(tag_token("on") == PosTag::IN);
    CHECK(tag_token("shirt") == PosTag::NN);
    CHECK(parse_tag(tag_name(PosTag::VB)) == PosTag::VB);
    CHECK_THROWS_AS(parse_tag("XX"), ParseError);
}

TEST_CASE("tagger agrees with the synthetic generator's gold tags") {
    auto const c = corpus::SynthConfig::defaults();
    for (std::uint64_t seed : {1, 2, 3}) {
        auto const sample = corpus::synth_tagged_sample(c, 200, seed);
        REQUIRE(sample.size() == 200);
        std::size_t agree = 0;
        for (auto const& t : sample) {
            agree += tag_name(tag_token(t.token)) == t.tag ? 1 : 0;
        }
        CHECK(static_cast<double>(agree) / 200.0 >= 0.95);
    }
}

TEST_CASE("extraction keeps a frequent adjective that is also an answer") {
    std::vector<Tokens> texts(100, Tokens{"the", "shirt", "is", "white"});
    std::vector<Tokens> answers(30, Tokens{"white"});
    auto const rules = default_pos_rules();
    auto const r = extract_attribute_vocab(texts, answers, rules, 5);
    CHECK(r.vocab.find({"white"}).has_value());
    CHECK(r.vocab.entry(*r.vocab.find({"white"})).pattern == PosPattern{PosTag::JJ});
    CHECK_FALSE(r.vocab.find({"shirt"}).has_value());
}

TEST_CASE("extraction matches a brute-force frequency counter") {
    Tokens const lexicon{"white", "black", "red",  "shirt", "dog", "table", "on",
                         "in",    "run",   "play", "two",   "the", "is",    "wooden"};
    auto const rules = default_pos_rules();
    Rng rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Tokens> texts;
        std::vector<Tokens> answers;
        std::size_t const n_texts = 5 + rng.index(40);
        for (std::size_t t = 0; t < n_texts; ++t) {
            Tokens text;
            std::size_t const len = 1 + rng.index(8);
            for (std::size_t w = 0; w < len; ++w) {
                text.push_back(lexicon[rng.index(lexicon.size())]);
            }
            texts.push_back(text);
        }
        for (std::size_t a = 0; a < 6; ++a) {
            answers.push_back({lexicon[rng.index(lexicon.size())]});
        }
        std::size_t const k = 1 + rng.index(25);
        auto const r = extract_attribute_vocab(texts, answers, rules, k);
        auto const expect = naive_top_k(texts, answers, rules, k);
        REQUIRE(r.vocab.size() == expect.size());
        CHECK(r.shortfall == k - expect.size());
        for (std::size_t e = 0; e < expect.size(); ++e) {
            CHECK(r.vocab.entry(e).tokens == expect[e].first);
            CHECK(r.frequencies[e] == expect[e].second);
            CHECK(r.vocab.entry(e).tokens.size() <= kMaxExpressionLength);
        }
        auto const again = extract_attribute_vocab(texts, answers, rules, k);
        CHECK(again.vocab == r.vocab);
    }
}

TEST_CASE("answer filter uses only the most frequent answers") {
    std::vector<Tokens> texts{{"white"}, {"black"}, {"black"}};
    std::vector<Tokens> answers{{"white"}, {"white"}, {"black"}};
    auto const rules = default_pos_rules();
    auto const r = extract_attribute_vocab(texts, answers, rules, 10, 1);
    CHECK(r.vocab.size() == 1);
    CHECK(r.vocab.expression(0) == "white");
    CHECK(r.shortfall == 9);
}

TEST_CASE("vocabulary rejects long and duplicate expressions") {
    CHECK_THROWS_AS(AttributeVocab({{{"a", "b", "c", "d"}, {PosTag::NN, PosTag::NN, PosTag::NN, PosTag::NN}}}),
                    SchemaError);
    CHECK_THROWS_AS(AttributeVocab({{{"white"}, {PosTag::JJ}}, {{"white"}, {PosTag::JJ}}}), SchemaError);
    AttributeVocab v({{{"white"}, {PosTag::JJ}}, {{"on", "table"}, {PosTag::IN, PosTag::NN}}});
    CHECK(AttributeVocab::from_json(v.to_json()) == v);
    CHECK(v.to_json()[1]["pos_pattern"] == "IN,NN");
}

TEST_CASE("region labels are contiguous matches in descriptions and answers") {
    AttributeVocab v({{{"white"}, {PosTag::JJ}},
                      {{"in", "white", "shirt"}, {PosTag::IN, PosTag::JJ, PosTag::NN}},
                      {{"white", "man"}, {PosTag::JJ, PosTag::NN}}});
    corpus::RegionRecord r;
    r.descriptions = {"man in white shirt"};
    CHECK(label_region(r, v) == std::vector<float>{1, 1, 0});
    corpus::RegionRecord empty;
    CHECK(label_region(empty, v) == std::vector<float>{0, 0, 0});
}

TEST_CASE("labels of synthetic regions equal the generator's values") {
    auto c = corpus::SynthConfig::defaults();
    c.num_images = 60;
    c.num_pairs = 0;
    auto const world = corpus::synth_microworld(c, 4);
    std::vector<corpus::RegionRecord const*> regions;
    for (auto const& r : world.store.regions()) {
        regions.push_back(&r);
    }
    REQUIRE(regions.size() >= 100);
    regions.resize(100);
    auto const ac = collect_attribute_corpus(regions);
    auto const vocab = extract_attribute_vocab(ac.texts, ac.answers, default_pos_rules(), 612).vocab;
    REQUIRE(vocab.size() > 20);
    for (auto const* r : regions) {
        auto const& values = world.truth.region_values.at(r->region_id);
        auto const labels = label_region(*r, vocab);
        for (std::size_t k = 0; k < vocab.size(); ++k) {
            bool expected = false;
            for (std::size_t f = 0; f < c.families.size(); ++f) {
                expected = expected || contains_run(corpus::tokenize(c.families[f].values[values[f]]),
                                                    vocab.entry(k).tokens);
            }
            CHECK(labels[k] == (expected ? 1.0f : 0.0f));
        }
    }
}

TEST_CASE("untrained model scores 0.5 and checks input length") {
    auto const m = make_attr_model<float>(7, 4, 3);
    std::vector<float> x(7, 0.3f);
    CHECK(predict_attributes(m, std::span<float const>(x)) == std::vector<float>{0.5f, 0.5f, 0.5f});
    std::vector<float> bad(6, 0.0f);
    CHECK_THROWS_AS(predict_attributes(m, std::span<float const>(bad)), ShapeError);
}

TEST_CASE("visual similarity is the Gram matrix of the output weight rows") {
    auto m = make_attr_model<float>(5, 6, 10);
    Rng rng(3);
    auto& w = m.params.value(m.layers.back().weight);
    REQUIRE(w.rows() == 10);
    REQUIRE(w.cols() == 6);
    for (auto& x : w.data()) {
        x = static_cast<float>(rng.uniform(-1, 1));
    }
    w.row(7)[0] = 1.0f;
    for (std::size_t c = 1; c < 6; ++c) {
        w.row(7)[c] = 0.0f;
    }
    w.row(8)[0] = 0.0f;
    auto const sim = visual_similarity_matrix(m);
    for (std::size_t i = 0; i < 10; ++i) {
        for (std::size_t j = 0; j < 10; ++j) {
            double expect = 0;
            for (std::size_t c = 0; c < 6; ++c) {
                expect += static_cast<double>(w(i, c)) * static_cast<double>(w(j, c));
            }
            CHECK(sim(i, j) == doctest::Approx(expect).epsilon(1e-12));
            CHECK(visual_similarity(m, i, j) == visual_similarity(m, j, i));
        }
        CHECK(visual_similarity(m, i, i) >= 0.0);
    }
    CHECK(visual_similarity(m, 7, 8) == 0.0);
    CHECK_THROWS_AS(visual_similarity(m, 10, 0), IndexError);

    auto const cos = visual_similarity_matrix(m, true);
    for (std::size_t i = 0; i < 10; ++i) {
        CHECK(cos(i, i) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("mean average precision against a ranking oracle") {
    std::vector<std::vector<float>> scores{{0.9f, 0.1f}, {0.8f, 0.7f}, {0.7f, 0.2f}};
    std::vector<std::vector<float>> labels{{1, 0}, {0, 0}, {1, 1}};
    double const ap0 = naive_average_precision({0.9, 0.8, 0.7}, {1, 0, 1});
    double const ap1 = naive_average_precision({0.1, 0.7, 0.2}, {0, 0, 1});
    CHECK(ap0 == doctest::Approx((1.0 + 2.0 / 3.0) / 2.0));
    CHECK(ap1 == doctest::Approx(0.5));
    CHECK(mean_average_precision(scores, labels) == doctest::Approx((ap0 + ap1) / 2.0).epsilon(1e-12));
}

TEST_CASE("training on noiseless synthetic regions recovers every family value") {
    auto c = corpus::SynthConfig::defaults();
    c.noise_sigma = 0.0;
    c.num_images = 300;
    c.num_pairs = 0;
    auto const world = corpus::synth_microworld(c, 6);
    std::vector<corpus::RegionRecord const*> train;
    std::vector<corpus::RegionRecord const*> held;
    for (auto const& r : world.store.regions()) {
        (r.image_id < "img_00240" ? train : held).push_back(&r);
    }
    auto const ac = collect_attribute_corpus(train);
    auto const vocab = extract_attribute_vocab(ac.texts, ac.answers, default_pos_rules(), 612).vocab;
    auto const samples = make_attr_samples(train, vocab);
    auto hyper = default_attr_hyper(corpus::Profile::synthetic);
    auto const model = train_attr_model(samples, samples.front().input.size(), vocab.size(), hyper);

    std::size_t right = 0;
    std::size_t total = 0;
    for (auto const* r : held) {
        auto const scores = predict_attributes(model, *r);
        auto const& truth = world.truth.region_values.at(r->region_id);
        for (std::size_t f = 0; f < c.families.size(); ++f) {
            std::size_t best_value = 0;
            float best = -1.0f;
            for (std::size_t v = 0; v < c.families[f].values.size(); ++v) {
                auto const k = vocab.find(corpus::tokenize(c.families[f].values[v]));
                if (k && scores[*k] > best) {
                    best = scores[*k];
                    best_value = v;
                }
            }
            right += best_value == truth[f] ? 1 : 0;
            ++total;
        }
    }
    CHECK(static_cast<double>(right) / static_cast<double>(total) >= 0.99);
}
