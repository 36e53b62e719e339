#include <doctest.h>

#include <cmath>
#include <vector>

#include "discrimq/errors.hpp"
#include "discrimq/nn/checkpoint.hpp"
#include "discrimq/nn/gradcheck.hpp"
#include "discrimq/nn/loss.hpp"
#include "discrimq/nn/lstm.hpp"
#include "discrimq/nn/mlp.hpp"
#include "discrimq/nn/optim.hpp"
#include "discrimq/nn/param_store.hpp"
#include "discrimq/rng.hpp"

using namespace discrimq;
using namespace discrimq::nn;

namespace {

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void fill_random(ParamStore<double>& store, Rng& rng, double scale) {
    for (auto& e : store.entries()) {
        for (auto& v : e.value.data()) {
            v = rng.uniform(-scale, scale);
        }
    }
}

// Element-by-element LSTM step over the raw weight matrix, gate rows in the
// order input, forget, output, candidate.
void scalar_lstm(Tensor<double> const& w, Tensor<double> const& b, std::vector<double> const& x,
                 std::vector<double> const& h, std::vector<double> const& c, std::vector<double>& h_out,
                 std::vector<double>& c_out) {
    std::size_t const hd = h.size();
    std::vector<double> in = x;
    in.insert(in.end(), h.begin(), h.end());
    auto pre = [&](std::size_t row) {
        double s = b(row, 0);
        for (std::size_t k = 0; k < in.size(); ++k) {
            s += w(row, k) * in[k];
        }
        return s;
    };
    h_out.assign(hd, 0.0);
    c_out.assign(hd, 0.0);
    for (std::size_t u = 0; u < hd; ++u) {
        double const ig = sig(pre(u));
        double const fg = sig(pre(hd + u));
        double const og = sig(pre(2 * hd + u));
        double const gg = std::tanh(pre(3 * hd + u));
        c_out[u] = fg * c[u] + ig * gg;
        h_out[u] = og * std::tanh(c_out[u]);
    }
}

}  // namespace

TEST_CASE("lstm step with zero weights keeps a zero state") {
    ParamStore<double> store;
    auto layer = add_lstm_layer(store, "l", 3, 4);
    std::vector<double> x{0.3, -1.0, 2.0};
    auto s = lstm_step<double>(x, LstmState<double>::zeros(4), store, layer);
    for (std::size_t u = 0; u < 4; ++u) {
        CHECK(s.h[u] == 0.0);
        CHECK(s.c[u] == 0.0);
    }
}

TEST_CASE("lstm step with saturated forget gate carries the cell") {
    ParamStore<double> store;
    auto layer = add_lstm_layer(store, "l", 2, 3);
    auto& b = store.value(layer.bias);
    for (std::size_t u = 0; u < 3; ++u) {
        b(u, 0) = -100.0;
        b(3 + u, 0) = 100.0;
    }
    LstmState<double> state{{0.1, -0.2, 0.3}, {0.5, -1.5, 2.0}};
    std::vector<double> x{1.0, -1.0};
    auto s = lstm_step<double>(x, state, store, layer);
    for (std::size_t u = 0; u < 3; ++u) {
        CHECK(s.c[u] == doctest::Approx(state.c[u]).epsilon(1e-12));
    }
}

TEST_CASE("lstm step matches the scalar evaluator") {
    Rng rng(11);
    ParamStore<double> store;
    auto layer = add_lstm_layer(store, "l", 5, 8);
    fill_random(store, rng, 0.8);
    std::vector<double> x(5);
    std::vector<double> h(8);
    std::vector<double> c(8);
    for (int trial = 0; trial < 10; ++trial) {
        for (auto& v : x) v = rng.uniform(-2, 2);
        for (auto& v : h) v = rng.uniform(-1, 1);
        for (auto& v : c) v = rng.uniform(-3, 3);
        auto s = lstm_step<double>(x, LstmState<double>{h, c}, store, layer);
        std::vector<double> h_ref;
        std::vector<double> c_ref;
        scalar_lstm(store.value(layer.weight), store.value(layer.bias), x, h, c, h_ref, c_ref);
        for (std::size_t u = 0; u < 8; ++u) {
            CHECK(std::abs(s.h[u] - h_ref[u]) < 1e-12);
            CHECK(std::abs(s.c[u] - c_ref[u]) < 1e-12);
            CHECK(std::abs(s.h[u]) < 1.0);
        }
    }
}

TEST_CASE("lstm step rejects mismatched input") {
    ParamStore<double> store;
    auto layer = add_lstm_layer(store, "enc", 3, 2);
    std::vector<double> x{1.0, 2.0};
    CHECK_THROWS_AS(lstm_step<double>(x, LstmState<double>::zeros(2), store, layer), ShapeError);
    try {
        lstm_step<double>(x, LstmState<double>::zeros(2), store, layer);
    } catch (ShapeError const& e) {
        CHECK(std::string(e.what()).find("enc") != std::string::npos);
    }
    std::vector<double> ok{1.0, 2.0, 3.0};
    CHECK_THROWS_AS(lstm_step<double>(ok, LstmState<double>::zeros(5), store, layer), ShapeError);
}

TEST_CASE("mlp identity and zero-sigmoid layers") {
    ParamStore<double> store;
    std::vector<DenseLayer> layers{add_dense_layer(store, "id", 3, 3, Activation::identity)};
    auto& w = store.value(layers[0].weight);
    for (std::size_t k = 0; k < 3; ++k) w(k, k) = 1.0;
    std::vector<double> x{0.5, -2.0, 7.0};
    CHECK(mlp_forward<double>(x, store, layers) == x);

    ParamStore<double> zs;
    std::vector<DenseLayer> zl{add_dense_layer(zs, "z", 3, 4, Activation::sigmoid)};
    for (double v : mlp_forward<double>(x, zs, zl)) {
        CHECK(v == 0.5);
    }
}

TEST_CASE("mlp forward matches hand-chained arithmetic") {
    Rng rng(5);
    ParamStore<double> store;
    std::vector<DenseLayer> layers{add_dense_layer(store, "h", 4, 3, Activation::tanh),
                                   add_dense_layer(store, "o", 3, 2, Activation::sigmoid)};
    fill_random(store, rng, 1.0);
    std::vector<double> x{0.2, -0.7, 1.1, 0.05};
    auto const& w1 = store.value(layers[0].weight);
    auto const& b1 = store.value(layers[0].bias);
    auto const& w2 = store.value(layers[1].weight);
    auto const& b2 = store.value(layers[1].bias);
    std::vector<double> hid(3);
    for (std::size_t r = 0; r < 3; ++r) {
        double s = b1(r, 0);
        for (std::size_t k = 0; k < 4; ++k) s += w1(r, k) * x[k];
        hid[r] = std::tanh(s);
    }
    auto y = mlp_forward<double>(x, store, layers);
    REQUIRE(y.size() == 2);
    for (std::size_t r = 0; r < 2; ++r) {
        double s = b2(r, 0);
        for (std::size_t k = 0; k < 3; ++k) s += w2(r, k) * hid[k];
        CHECK(std::abs(y[r] - sig(s)) < 1e-14);
        CHECK(y[r] > 0.0);
        CHECK(y[r] < 1.0);
    }
}

TEST_CASE("mlp rejects a broken chain") {
    ParamStore<double> store;
    std::vector<DenseLayer> layers{add_dense_layer(store, "a", 4, 3, Activation::tanh),
                                   add_dense_layer(store, "b", 2, 2, Activation::identity)};
    std::vector<double> x(4, 1.0);
    CHECK_THROWS_AS(mlp_forward<double>(x, store, layers), ShapeError);
}

TEST_CASE("multilabel loss values") {
    std::vector<double> half{0.5, 0.5, 0.5, 0.5};
    std::vector<double> t{1, 0, 0, 1};
    CHECK(loss_multilabel<double>(half, t) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(loss_multilabel<double>(t, t) < 1e-11);

    std::vector<double> s{0.9, 0.2, 0.5};
    std::vector<double> t3{1, 0, 1};
    double const expect = -(std::log(0.9) + std::log(0.8) + std::log(0.5)) / 3.0;
    CHECK(std::abs(loss_multilabel<double>(s, t3) - expect) < 1e-14);

    std::vector<double> short_t{1, 0};
    CHECK_THROWS_AS(loss_multilabel<double>(s, short_t), ShapeError);
}

TEST_CASE("categorical loss values") {
    std::vector<double> uniform(4, 0.7);
    CHECK(loss_categorical<double>(uniform, 2) == doctest::Approx(std::log(4.0)).epsilon(1e-14));
    std::vector<double> peaked{0.0, 100.0, 0.0};
    CHECK(loss_categorical<double>(peaked, 1) < 1e-40 + 1e-12);
    std::vector<double> l{1.0, 2.0, 0.5};
    double const expect = -std::log(std::exp(2.0) / (std::exp(1.0) + std::exp(2.0) + std::exp(0.5)));
    CHECK(std::abs(loss_categorical<double>(l, 1) - expect) < 1e-14);
    CHECK_THROWS_AS(loss_categorical<double>(l, 3), IndexError);

    auto lp = log_softmax<double>(l);
    double sum = 0.0;
    for (double v : lp) sum += std::exp(v);
    CHECK(std::abs(sum - 1.0) < 1e-12);
}

TEST_CASE("adam with zero gradient is a no-op that still counts the step") {
    ParamStore<double> store;
    auto p = store.add("w", 2, 2);
    store.value(p)(0, 1) = 3.0;
    auto before = store.value(p);
    store.zero_grad();
    adam_update(store, {});
    CHECK(store.value(p) == before);
    CHECK(store.step() == 1);
    store.zero_grad();
    adam_update(store, {});
    CHECK(store.value(p) == before);
    CHECK(store.step() == 2);
}

TEST_CASE("adam first step moves by the learning rate") {
    ParamStore<double> store;
    auto p = store.add("w", 1, 1);
    store.zero_grad();
    store.grad(p)(0, 0) = 1.0;
    adam_update(store, {0.1, 0.9, 0.999, 1e-8});
    CHECK(store.value(p)(0, 0) == doctest::Approx(-0.1).epsilon(1e-6));
}

TEST_CASE("adam on w^2 follows the hand iteration") {
    ParamStore<double> store;
    auto p = store.add("w", 1, 1);
    store.value(p)(0, 0) = 1.0;
    AdamConfig const hyper{0.1, 0.9, 0.999, 1e-8};
    double w = 1.0;
    double m = 0.0;
    double v = 0.0;
    for (int t = 1; t <= 3; ++t) {
        store.zero_grad();
        store.grad(p)(0, 0) = 2.0 * store.value(p)(0, 0);
        adam_update(store, hyper);

        double const g = 2.0 * w;
        m = 0.9 * m + 0.1 * g;
        v = 0.999 * v + 0.001 * g * g;
        double const mh = m / (1.0 - std::pow(0.9, t));
        double const vh = v / (1.0 - std::pow(0.999, t));
        w -= 0.1 * mh / (std::sqrt(vh) + 1e-8);
        CHECK(std::abs(store.value(p)(0, 0) - w) < 1e-12);
    }
}

TEST_CASE("adam refuses gradients that were never populated") {
    ParamStore<double> store;
    store.add("w", 1, 1);
    CHECK_THROWS_AS(adam_update(store, {}), StateError);
}

TEST_CASE("gradient clipping") {
    ParamStore<double> store;
    auto p = store.add("g", 1, 2);
    store.zero_grad();
    store.grad(p)(0, 0) = 0.3;
    store.grad(p)(0, 1) = 0.4;
    CHECK(clip_gradients(store, 1.0) == doctest::Approx(0.5));
    CHECK(store.grad(p)(0, 0) == 0.3);

    store.grad(p)(0, 0) = 3.0;
    store.grad(p)(0, 1) = 4.0;
    CHECK(clip_gradients(store, 1.0) == doctest::Approx(5.0));
    CHECK(store.grad(p)(0, 0) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(store.grad(p)(0, 1) == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("clipped multi-tensor norm equals min(norm, max) and clipping is idempotent") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        ParamStore<double> store;
        store.add("a", 3, 4);
        store.add("b", 5, 1);
        store.add("c", 2, 2);
        store.zero_grad();
        for (auto& e : store.entries()) {
            for (auto& g : e.grad.data()) g = rng.uniform(-2, 2);
        }
        double const max_norm = rng.uniform(0.5, 6.0);
        double const pre = clip_gradients(store, max_norm);
        double acc = 0.0;
        for (auto const& e : store.entries()) {
            for (double g : e.grad.data()) acc += g * g;
        }
        CHECK(std::abs(std::sqrt(acc) - std::min(pre, max_norm)) < 1e-9);
        std::vector<double> once;
        for (auto const& e : store.entries()) once.insert(once.end(), e.grad.data().begin(), e.grad.data().end());
        clip_gradients(store, max_norm);
        std::vector<double> twice;
        for (auto const& e : store.entries()) twice.insert(twice.end(), e.grad.data().begin(), e.grad.data().end());
        for (std::size_t k = 0; k < once.size(); ++k) {
            CHECK(std::abs(once[k] - twice[k]) < 1e-15);
        }
    }
}

TEST_CASE("finite difference check on a linear loss") {
    ParamStore<double> store;
    auto p = store.add("w", 2, 3);
    Rng rng(1);
    fill_random(store, rng, 1.0);
    LossFunction loss = [p](ParamStore<double>& s, bool with_grad) {
        double sum = 0.0;
        for (double v : s.value(p).data()) sum += v;
        if (with_grad) {
            for (auto& g : s.grad(p).data()) g += 1.0;
        }
        return sum;
    };
    auto r = finite_diff_check(loss, store);
    CHECK(r.max_rel_error < 1e-9);
    CHECK(r.coordinates == 6);
}

TEST_CASE("finite difference check on mlp with multilabel loss") {
    Rng rng(9);
    ParamStore<double> store;
    std::vector<DenseLayer> layers{add_dense_layer(store, "h", 6, 5, Activation::tanh),
                                   add_dense_layer(store, "o", 5, 4, Activation::sigmoid)};
    store.init_uniform(rng);
    std::vector<double> x{0.1, -0.4, 0.9, 0.3, -1.2, 0.6};
    std::vector<double> t{1, 0, 1, 0};
    LossFunction loss = [&](ParamStore<double>& s, bool with_grad) {
        MlpCache<double> cache;
        auto y = mlp_forward<double>(x, s, layers, &cache);
        double const l = loss_multilabel<double>(y, t);
        if (with_grad) {
            auto g = multilabel_logit_grad<double>(y, t);
            mlp_backward<double>(cache, g, GradientAt::pre_activation, s, layers);
        }
        return l;
    };
    CHECK(finite_diff_check(loss, store).max_rel_error < 1e-4);
    CHECK(finite_diff_check(loss, store, {.stencil = Stencil::two_point, .eps = 1e-5}).max_rel_error < 1e-4);
}

TEST_CASE("four-point differences are exact on a quartic") {
    ParamStore<double> store;
    auto p = store.add("w", 1, 3);
    store.value(p).data()[0] = 0.3;
    store.value(p).data()[1] = -1.1;
    store.value(p).data()[2] = 2.0;
    LossFunction loss = [p](ParamStore<double>& s, bool with_grad) {
        double sum = 0.0;
        for (double v : s.value(p).data()) sum += v * v * v * v;
        if (with_grad) {
            auto w = s.value(p).data();
            auto g = s.grad(p).data();
            for (std::size_t k = 0; k < w.size(); ++k) g[k] += 4.0 * w[k] * w[k] * w[k];
        }
        return sum;
    };
    CHECK(finite_diff_check(loss, store, {.eps = 1e-2}).max_rel_error < 1e-10);
    CHECK(finite_diff_check(loss, store, {.stencil = Stencil::two_point, .eps = 1e-2}).max_rel_error > 1e-6);
}

TEST_CASE("finite difference check rejects a non-finite loss") {
    ParamStore<double> store;
    store.add("w", 1, 1);
    LossFunction loss = [](ParamStore<double>&, bool) { return std::nan(""); };
    CHECK_THROWS_AS(finite_diff_check(loss, store), NumericError);
}

TEST_CASE("checkpoint round trip is byte exact") {
    Rng rng(4);
    ParamStore<float> store;
    store.add("a", 3, 2);
    store.add("b", 1, 4, false);
    store.init_uniform(rng);
    store.set_step(17);
    nlohmann::json meta{{"model", "test"}, {"hidden", 3}};
    auto bytes = encode_checkpoint(store, meta);
    auto back = decode_checkpoint<float>(bytes);
    CHECK(back.meta == meta);
    CHECK(back.params.step() == 17);
    CHECK(encode_checkpoint(back.params, back.meta) == bytes);
    CHECK(back.params.entries()[1].trainable == false);
    for (std::size_t p = 0; p < store.size(); ++p) {
        CHECK(back.params.entries()[p].value == store.entries()[p].value);
    }

    auto broken = bytes;
    broken[0] = 'X';
    CHECK_THROWS(decode_checkpoint<float>(broken));
}
