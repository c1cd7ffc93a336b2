#include <doctest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "rankbo/deepset.hpp"
#include "rankbo/error.hpp"

using namespace rankbo;

namespace {

DeepSetLayout small_layout() {
    DeepSetLayout l;
    l.inner_hidden = {6};
    l.inner_output = 5;
    l.outer_hidden = {4};
    l.output_dim = 3;
    return l;
}

SupportSet random_support(std::mt19937_64& rng, std::size_t n, std::size_t d) {
    SupportSet s;
    s.x = Matrix(n, d);
    s.x.data = oracle::random_vector(rng, n * d, -1.0, 1.0);
    s.y = oracle::random_vector(rng, n, -1.0, 1.0);
    return s;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double t = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) t += a[i] * b[i];
    return t;
}

}  // namespace

TEST_CASE("deepset_encode of one element is the plain composition") {
    const auto p = deepset_init(2, small_layout(), Activation::tanh, 4);
    SupportSet s;
    s.x = Matrix::from_rows({{0.25, -0.5}});
    s.y = {0.75};
    const auto z = deepset_encode(p, s).features.z;
    const auto h = oracle::mlp_eval(p.inner, {0.25, -0.5, 0.75});
    const auto expect = oracle::mlp_eval(p.outer, std::vector<double>(h.begin(), h.end()));
    REQUIRE(z.size() == 3);
    for (std::size_t i = 0; i < z.size(); ++i) CHECK(z[i] == doctest::Approx(static_cast<double>(expect[i])).epsilon(1e-13));
}

TEST_CASE("deepset_encode is exactly permutation invariant") {
    std::mt19937_64 rng(21);
    const auto p = deepset_init(3, DeepSetLayout{}, Activation::relu, 9);
    for (int trial = 0; trial < 20; ++trial) {
        const auto s = random_support(rng, 2 + rng() % 30, 3);
        std::vector<std::size_t> idx(s.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::shuffle(idx.begin(), idx.end(), rng);
        CHECK(deepset_encode(p, s).features.z == deepset_encode(p, s.subset(idx)).features.z);
        CHECK(deepset_encode(p, s).features.z.size() == 16);
    }
}

TEST_CASE("duplicating every support element leaves z unchanged") {
    std::mt19937_64 rng(22);
    const auto p = deepset_init(2, small_layout(), Activation::tanh, 10);
    const auto s = random_support(rng, 7, 2);
    std::vector<std::size_t> twice;
    for (std::size_t i = 0; i < s.size(); ++i) twice.insert(twice.end(), {i, i});
    const auto a = deepset_encode(p, s).features.z;
    const auto b = deepset_encode(p, s.subset(twice)).features.z;
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-12);
}

TEST_CASE("deepset_encode validates its input") {
    const auto p = deepset_init(2, small_layout(), Activation::relu, 1);
    SupportSet empty;
    empty.x = Matrix(0, 2);
    CHECK_THROWS_AS(deepset_encode(p, empty), EmptySupportError);
    SupportSet wrong;
    wrong.x = Matrix::from_rows({{1.0, 2.0, 3.0}});
    wrong.y = {0.0};
    CHECK_THROWS_AS(deepset_encode(p, wrong), ShapeError);
}

TEST_CASE("deepset_backward") {
    std::mt19937_64 rng(23);
    const auto p = deepset_init(2, small_layout(), Activation::tanh, 12);

    SUBCASE("zero upstream gradient") {
        const auto enc = deepset_encode(p, random_support(rng, 4, 2));
        const auto g = deepset_backward(p, enc.cache, std::vector<double>(3, 0.0));
        for (double v : g.inner.values) CHECK(v == 0.0);
        for (double v : g.outer.values) CHECK(v == 0.0);
    }
    SUBCASE("single element equals the direct chain rule") {
        SupportSet s;
        s.x = Matrix::from_rows({{0.1, 0.9}});
        s.y = {-0.4};
        const std::vector<double> zg{0.3, -1.0, 0.5};
        const auto g = deepset_backward(p, deepset_encode(p, s).cache, zg);
        const auto h = mlp_forward(p.inner, std::vector<double>{0.1, 0.9, -0.4});
        const auto o = mlp_forward(p.outer, h.output);
        const auto go = mlp_backward(p.outer, o.cache, zg);
        const auto gi = mlp_backward(p.inner, h.cache, go.input_grad);
        for (std::size_t i = 0; i < go.values.size(); ++i) CHECK(g.outer.values[i] == doctest::Approx(go.values[i]).epsilon(1e-14));
        for (std::size_t i = 0; i < gi.values.size(); ++i) CHECK(g.inner.values[i] == doctest::Approx(gi.values[i]).epsilon(1e-14));
    }
    SUBCASE("five elements match finite differences on every parameter") {
        const auto s = random_support(rng, 5, 2);
        const std::vector<double> c{0.7, -0.2, 1.3};
        const auto g = deepset_backward(p, deepset_encode(p, s).cache, c);
        const auto fd_inner = oracle::finite_difference(
            [&](const std::vector<double>& v) {
                auto q = p;
                q.inner.values = v;
                return dot(deepset_encode(q, s).features.z, c);
            },
            p.inner.values);
        const auto fd_outer = oracle::finite_difference(
            [&](const std::vector<double>& v) {
                auto q = p;
                q.outer.values = v;
                return dot(deepset_encode(q, s).features.z, c);
            },
            p.outer.values);
        CHECK(oracle::worst_gradient_error(g.inner.values, fd_inner, 1e-6) < 1e-4);
        CHECK(oracle::worst_gradient_error(g.outer.values, fd_outer, 1e-6) < 1e-4);
    }
    SUBCASE("wrong gradient length") {
        const auto enc = deepset_encode(p, random_support(rng, 3, 2));
        CHECK_THROWS_AS(deepset_backward(p, enc.cache, std::vector<double>(2, 0.0)), ShapeError);
    }
}
