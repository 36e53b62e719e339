#include <doctest.h>

#include <cmath>

#include "discrimq/attributes/attribute_vocab.hpp"
#include "discrimq/corpus/synth.hpp"
#include "discrimq/corpus/tokenizer.hpp"
#include "discrimq/errors.hpp"
#include "discrimq/rng.hpp"
#include "discrimq/vqa/vqa_model.hpp"

using namespace discrimq;
using namespace discrimq::vqa;

namespace {

struct SynthSetup {
    corpus::SynthConfig config = corpus::SynthConfig::defaults();
    corpus::SynthWorld world;
    std::vector<corpus::RegionRecord const*> train;
    std::vector<corpus::RegionRecord const*> held;
    corpus::Vocabulary vocab;
    attributes::AttributeVocab attrs;
};

SynthSetup make_setup() {
    SynthSetup s;
    s.config.num_images = 300;
    s.config.num_pairs = 0;
    s.world = corpus::synth_microworld(s.config, 8);
    std::vector<std::vector<std::string>> questions;
    for (auto const& r : s.world.store.regions()) {
        bool const is_train = r.image_id < "img_00240";
        (is_train ? s.train : s.held).push_back(&r);
        if (is_train) {
            for (auto const& qa : r.questions) {
                questions.push_back(corpus::tokenize(qa.text));
            }
        }
    }
    s.vocab = corpus::Vocabulary::build(questions, 1);
    auto const ac = attributes::collect_attribute_corpus(s.train);
    s.attrs = attributes::extract_attribute_vocab(ac.texts, ac.answers, attributes::default_pos_rules(), 612).vocab;
    return s;
}

}  // namespace

TEST_CASE("zero model answers uniformly and picks the lowest index") {
    auto const m = make_vqa_model<float>(8, 3, 4, 5, 6);
    std::vector<corpus::TokenId> words{4, 5};
    std::vector<float> f(5, 0.2f);
    auto const a = predict_answer(m, words, f);
    CHECK(a.index == 0);
    CHECK(a.probability == doctest::Approx(1.0 / 6.0).epsilon(1e-6));
    CHECK_THROWS_AS(predict_answer(m, std::vector<corpus::TokenId>{}, f), InputError);
    CHECK(question_similarity(m, 2, 3) == 0.0);
    CHECK(question_similarity_matrix(m).max_abs() == 0.0);
}

TEST_CASE("question similarity is the Gram matrix of W_q") {
    auto m = make_vqa_model<float>(8, 3, 4, 5, 9);
    Rng rng(19);
    for (auto& x : m.params.value(m.w_q).data()) {
        x = static_cast<float>(rng.normal());
    }
    auto const& w = m.w_q_matrix();
    auto const sim = question_similarity_matrix(m);
    REQUIRE(sim.size() == 9);
    for (std::size_t i = 0; i < 9; ++i) {
        for (std::size_t j = 0; j < 9; ++j) {
            double expect = 0;
            for (std::size_t c = 0; c < w.cols(); ++c) {
                expect += static_cast<double>(w(i, c)) * static_cast<double>(w(j, c));
            }
            CHECK(sim(i, j) == doctest::Approx(expect).epsilon(1e-12));
            CHECK(question_similarity(m, i, j) == question_similarity(m, j, i));
        }
        CHECK(question_similarity(m, i, i) >= 0.0);
    }
    CHECK(sim.is_symmetric());
    CHECK_THROWS_AS(question_similarity(m, 0, 9), IndexError);
}

TEST_CASE("a single repeated pair is memorized") {
    std::vector<VqaSample> samples(50, VqaSample{{4, 5, 6}, std::vector<float>(4, 0.5f), 2});
    VqaHyper hyper;
    hyper.embed = 4;
    hyper.hidden = 4;
    hyper.schedule.epochs = 200;
    hyper.schedule.batch_size = 50;
    hyper.schedule.adam.lr = 1e-2;
    std::vector<double> losses;
    auto const m = train_vqa(samples, 8, 4, 5, hyper, &losses);
    REQUIRE(losses.size() == 200);
    CHECK(losses.back() < 0.1);
    CHECK(predict_answer(m, samples[0].words, samples[0].feature).index == 2);
    CHECK_THROWS_AS(train_vqa(std::vector<VqaSample>{}, 8, 4, 5, hyper), DataError);
}

TEST_CASE("answer filtering keeps only attribute answers") {
    auto const s = make_setup();
    corpus::RegionRecord extra = *s.train.front();
    extra.questions = {{"what is on the table?", "a purple vase"}, {"what color is it?", "white"}};
    std::vector<corpus::RegionRecord const*> regions{&extra};
    auto const data = make_vqa_samples(regions, s.vocab, s.attrs);
    CHECK(data.dropped == 1);
    REQUIRE(data.samples.size() == 1);
    CHECK(s.attrs.expression(data.samples[0].answer) == "white");

    auto const all = make_vqa_samples(s.train, s.vocab, s.attrs);
    for (auto const& x : all.samples) {
        CHECK(x.answer < s.attrs.size());
    }
}

TEST_CASE("trained synthetic model answers held-out questions and groups families") {
    auto const s = make_setup();
    auto const train = make_vqa_samples(s.train, s.vocab, s.attrs);
    auto const held = make_vqa_samples(s.held, s.vocab, s.attrs);
    REQUIRE(train.samples.size() > 500);
    auto const hyper = default_vqa_hyper(corpus::Profile::synthetic);
    std::size_t const dim = train.samples.front().feature.size();
    auto const m = train_vqa(train.samples, s.vocab.size(), dim, s.attrs.size(), hyper);
    CHECK(answer_accuracy(m, held.samples) >= 0.9);

    corpus::RegionRecord const* red_ball = nullptr;
    auto const color = std::size_t{0};
    auto const object = *s.config.category_family;
    for (auto const* r : s.held) {
        auto const& v = s.world.truth.region_values.at(r->region_id);
        if (s.config.families[color].values[v[color]] == "red" &&
            s.config.families[object].values[v[object]] == "ball") {
            red_ball = r;
            break;
        }
    }
    REQUIRE(red_ball != nullptr);
    auto const words = s.vocab.encode(corpus::tokenize("what color is the ball"));
    auto const feature = corpus::region_representation(*red_ball);
    auto const a = predict_answer(m, words, feature);
    CHECK(s.attrs.expression(a.index) == "red");

    auto const sim = question_similarity_matrix(m);
    double same = 0;
    double cross = 0;
    std::size_t n_same = 0;
    std::size_t n_cross = 0;
    for (std::size_t i = 0; i < s.attrs.size(); ++i) {
        for (std::size_t j = 0; j < s.attrs.size(); ++j) {
            auto const fi = corpus::attribute_family(s.config, s.attrs.entry(i).tokens);
            auto const fj = corpus::attribute_family(s.config, s.attrs.entry(j).tokens);
            if (i == j || !fi || !fj) {
                continue;
            }
            if (*fi == *fj) {
                same += sim(i, j);
                ++n_same;
            } else {
                cross += sim(i, j);
                ++n_cross;
            }
        }
    }
    REQUIRE(n_same > 0);
    REQUIRE(n_cross > 0);
    CHECK(same / static_cast<double>(n_same) > cross / static_cast<double>(n_cross));
}
