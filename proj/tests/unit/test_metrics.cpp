#include <doctest.h>

#include <cmath>

#include "discrimq/errors.hpp"
#include "discrimq/metrics/bleu.hpp"
#include "discrimq/rng.hpp"
#include "oracles.hpp"

using namespace discrimq;
using namespace discrimq::metrics;

namespace {

Tokens words(std::string const& s) {
    Tokens t;
    std::size_t start = 0;
    while (start < s.size()) {
        auto end = s.find(' ', start);
        if (end == std::string::npos) {
            end = s.size();
        }
        t.push_back(s.substr(start, end - start));
        start = end + 1;
    }
    return t;
}

}  // namespace

TEST_CASE("brevity penalty") {
    CHECK(brevity_penalty(10, 10) == doctest::Approx(1.0));
    CHECK(brevity_penalty(11, 10) == 1.0);
    CHECK(brevity_penalty(5, 10) == doctest::Approx(std::exp(-1.0)));
    CHECK_THROWS_AS(brevity_penalty(0, 3), DomainError);
    std::vector<std::size_t> lens{3, 7, 5};
    CHECK(closest_length(6, lens) == 5);
    CHECK(closest_length(4, std::vector<std::size_t>{3, 5}) == 3);
}

TEST_CASE("BLEU examples") {
    std::vector<Tokens> hyp{words("what color is the shirt")};
    std::vector<std::vector<Tokens>> refs{{words("what color is the shirt")}};
    CHECK(bleu_corpus(hyp, refs).score == doctest::Approx(1.0).epsilon(1e-15));

    std::vector<Tokens> repeat{words("the the the the")};
    std::vector<std::vector<Tokens>> cat{{words("the cat")}};
    auto const s = bleu_corpus(repeat, cat, 1);
    CHECK(s.precisions[0] == doctest::Approx(0.25));
    CHECK(s.score == doctest::Approx(0.25));
    CHECK(bleu_corpus(repeat, cat).score == 0.0);

    CHECK_THROWS_AS(bleu_corpus(std::vector<Tokens>{}, std::vector<std::vector<Tokens>>{}), InputError);
    std::vector<std::vector<Tokens>> none{{}};
    CHECK_THROWS_AS(bleu_corpus(hyp, none), InputError);
}

TEST_CASE("BLEU matches a naive counting oracle") {
    Rng rng(42);
    for (int trial = 0; trial < 40; ++trial) {
        auto const c = oracle::random_corpus(rng, 1, 20, 5, false);
        auto const got = bleu_corpus(c.hyps, c.plain());
        CHECK(got.score == doctest::Approx(oracle::bleu(c.hyps, c.plain())).epsilon(1e-9));
    }
}

TEST_CASE("delta-BLEU with unit weights equals BLEU") {
    Rng rng(7);
    for (int trial = 0; trial < 40; ++trial) {
        auto const c = oracle::random_corpus(rng, 5, 50, 6, false);
        double const b = bleu_corpus(c.hyps, c.plain()).score;
        double const d = delta_bleu_corpus(c.hyps, c.weighted()).score;
        CHECK(std::abs(b - d) <= 1e-9);
    }
}

TEST_CASE("delta-BLEU matches a naive rated oracle") {
    Rng rng(11);
    std::size_t clamped = 0;
    for (int trial = 0; trial < 60; ++trial) {
        auto const c = oracle::random_corpus(rng, 1, 10, 4, true);
        auto const got = delta_bleu_corpus(c.hyps, c.weighted());
        auto const want = oracle::delta_bleu(c.hyps, c.refs);
        CHECK(got.score == doctest::Approx(want.value).epsilon(1e-9));
        CHECK(got.clamped_orders == want.clamped);
        clamped += got.clamped_orders > 0 ? 1 : 0;
    }
    CHECK(clamped > 0);
}

namespace {

std::vector<std::vector<oracle::Rated>> as_rated(std::vector<std::vector<WeightedReference>> const& refs) {
    std::vector<std::vector<oracle::Rated>> rated;
    for (auto const& set : refs) {
        auto& o = rated.emplace_back();
        for (auto const& r : set) {
            o.push_back({r.tokens, r.weight});
        }
    }
    return rated;
}

}  // namespace

TEST_CASE("delta-BLEU with a bigram found only in a negative reference") {
    std::vector<Tokens> hyps{words("what color is the shirt"), words("the man doing")};
    std::vector<std::vector<WeightedReference>> refs{
        {{words("what color is the shirt"), 1.0}, {words("what is the man doing"), -0.5}},
        {{words("the man doing"), -0.5}, {words("what is it"), 1.0}},
    };
    auto const got = delta_bleu_corpus(hyps, refs);
    auto const want = oracle::delta_bleu(hyps, as_rated(refs));
    CHECK(got.score == doctest::Approx(want.value).epsilon(1e-9));
    // Order 2: four matched bigrams of the first hypothesis, two negative
    // ones of the second.
    CHECK(got.numerators[1] == doctest::Approx(4.0 - 1.0));
    CHECK(got.denominators[1] == doctest::Approx(4.0 + 2.0));
    CHECK(got.clamped_orders == 0);
}

TEST_CASE("a negative corpus numerator is clamped") {
    std::vector<Tokens> hyps{words("man doing")};
    std::vector<std::vector<WeightedReference>> refs{{{words("the man doing"), -0.5}, {words("what is it"), 1.0}}};
    auto const got = delta_bleu_corpus(hyps, refs, 2);
    auto const want = oracle::delta_bleu(hyps, as_rated(refs), 2);
    CHECK(got.numerators[0] == doctest::Approx(-1.0));
    CHECK(got.numerators[1] == doctest::Approx(-0.5));
    CHECK(got.clamped_orders == 2);
    CHECK(want.clamped == 2);
    CHECK(got.precisions[0] == doctest::Approx(kNumeratorClamp / 2.0));
    CHECK(got.score == doctest::Approx(want.value).epsilon(1e-9));
    CHECK(got.score > 0.0);
    CHECK(got.score < 1e-8);
}

TEST_CASE("all-negative reference sets fall back for the length match") {
    std::vector<Tokens> hyps{words("what is this")};
    std::vector<std::vector<WeightedReference>> refs{{{words("what is this object"), -0.5}}};
    auto const s = delta_bleu_corpus(hyps, refs);
    CHECK(s.all_negative_eta_count == 1);
    CHECK(s.effective_reference_length == 4);
    std::vector<std::vector<WeightedReference>> bad{{{words("what"), 0.3}}};
    CHECK_THROWS_AS(delta_bleu_corpus(hyps, bad), InputError);
}

TEST_CASE("empty hypotheses score zero") {
    std::vector<Tokens> hyps{Tokens{}};
    std::vector<std::vector<WeightedReference>> refs{{{words("what is this"), 1.0}}};
    auto const s = delta_bleu_corpus(hyps, refs);
    CHECK(s.score == 0.0);
    CHECK(s.brevity_penalty == 0.0);
}

TEST_CASE("smoothed sentence BLEU") {
    std::vector<Tokens> self{words("a b c")};
    CHECK(sentence_bleu_smoothed(words("a b c"), self) == doctest::Approx(1.0));
    double const expect = std::exp((std::log(3.0 / 4.0) + std::log(1.0 / 3.0) + std::log(1.0 / 2.0) +
                                    std::log(1.0 / 1.0)) /
                                   4.0);
    std::vector<Tokens> ref{words("a x c")};
    CHECK(sentence_bleu_smoothed(words("a b c"), ref) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(sentence_bleu_smoothed(Tokens{}, ref) == 0.0);
}
