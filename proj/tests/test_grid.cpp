#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "hjgamma/errors.hpp"
#include "hjgamma/grid.hpp"

using namespace hjgamma;

TEST_CASE("StateGrid invariants") {
    const StateGrid g(-2.0, 2.0, 401);
    CHECK(g.spacing() == doctest::Approx(0.01));
    CHECK(g.node(0) == -2.0);
    CHECK(g.node(400) == 2.0);
    for (std::size_t i = 0; i < g.nodes(); ++i) CHECK(g.node(i) == doctest::Approx(-2.0 + 0.01 * i));
    CHECK_THROWS_AS(StateGrid(1.0, 1.0, 5), ConfigError);
    CHECK_THROWS_AS(StateGrid(0.0, 1.0, 2), ConfigError);
    CHECK_THROWS_AS(StateGrid(0.0, NAN, 5), ConfigError);
}

TEST_CASE("GridFunction rejects bad values") {
    const StateGrid g(0.0, 1.0, 5);
    CHECK_THROWS_AS(GridFunction(g, {1, 2, 3}), ConfigError);
    CHECK_THROWS_AS(GridFunction(g, {1, 2, 3, INFINITY, 5}), ConfigError);
}

TEST_CASE("sup_norm examples") {
    const StateGrid g(-2.0, 2.0, 101);
    CHECK(sup_norm(GridFunction::constant(g, 0.0)) == 0.0);
    CHECK(sup_norm(GridFunction::sample(g, [](double x) { return x; })) == 2.0);

    const StateGrid h(-std::numbers::pi, std::numbers::pi, 401);
    const auto s = GridFunction::sample(h, [](double x) { return std::sin(3 * x); });
    double dense = 0.0;
    for (std::size_t i = 0; i < h.nodes(); ++i) dense = std::max(dense, std::abs(std::sin(3 * h.node(i))));
    CHECK(sup_norm(s) == doctest::Approx(dense));
    CHECK(sup_norm(s) <= 1.0);
    CHECK(sup_norm(s) >= 0.999);
}

TEST_CASE("interpolate examples and bounds") {
    const StateGrid g(-1.0, 1.0, 21);
    const auto id = GridFunction::sample(g, [](double x) { return x; });
    CHECK(interpolate(id, 0.5) == doctest::Approx(0.5));
    CHECK(interpolate(id, g.node(3)) == id[3]);
    CHECK_THROWS_AS(interpolate(id, NAN), ConfigError);

    const StateGrid fine(-1.0, 1.0, 2001);
    const auto sq = GridFunction::sample(fine, [](double x) { return x * x; });
    CHECK(std::abs(interpolate(sq, 0.3) - 0.09) <= fine.spacing() * fine.spacing());

    // Clamped evaluation is flagged and stays within the value range.
    const auto e = id.evaluate(3.0);
    CHECK(e.clamped);
    CHECK(e.value == 1.0);

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const auto wavy = GridFunction::sample(g, [](double x) { return std::sin(5 * x) + x * x; });
    double slope = 0.0;
    for (std::size_t i = 1; i < g.nodes(); ++i) slope = std::max(slope, std::abs(wavy[i] - wavy[i - 1]) / g.spacing());
    for (int k = 0; k < 200; ++k) {
        const double a = u(rng), b = u(rng);
        const double fa = wavy(a), fb = wavy(b);
        CHECK(fa >= wavy.min() - 1e-12);
        CHECK(fa <= wavy.max() + 1e-12);
        CHECK(std::abs(fa - fb) <= slope * std::abs(a - b) + 1e-12);
    }
}

TEST_CASE("CompactFamily nesting") {
    const StateGrid g(-2.0, 2.0, 41);
    const std::vector<double> radii{0.5, 1.0, 2.0};
    const auto k = CompactFamily::nested(g, 0.0, radii);
    for (std::size_t a = 0; a < k.index_count(); ++a) {
        for (std::size_t b = a; b < k.index_count(); ++b) CHECK(k.is_nested(a, b));
    }
    CHECK(k.smallest_containing(-0.4, 0.4) == std::optional<std::size_t>(0));
    CHECK(k.smallest_containing(-0.4, 1.5) == std::optional<std::size_t>(2));
    CHECK_FALSE(k.smallest_containing(-3.0, 0.0).has_value());
    CHECK_THROWS_AS(CompactFamily(g, {{-1, 1}, {-0.5, 0.5}}), ConfigError);
    CHECK_THROWS_AS(CompactFamily(g, {{-3, 1}}), ConfigError);
}

TEST_CASE("SpaceSequence identity embeddings") {
    const StateGrid g(-1.0, 1.0, 21);
    const auto seq = SpaceSequence::identity(g, 3);
    const std::vector<double> radii{0.5, 1.0};
    const auto k = CompactFamily::nested(g, 0.0, radii);
    const std::vector<CompactFamily> member(3, k);
    CHECK(seq.images_within(0, member, k));
    CHECK(seq.liminf_covers(1, member, k));
    for (double x : seq.embedding(1)) CHECK(g.contains(x));
}

TEST_CASE("buc_lim_check examples") {
    const StateGrid g(0.0, 1.0, 101);
    const std::vector<double> radii{0.5};
    const auto k = CompactFamily::nested(g, 0.5, radii);
    const auto f = GridFunction::sample(g, [](double x) { return x * x; });

    std::vector<GridFunction> shifted;
    for (int n = 1; n <= 200; ++n) shifted.push_back(f + 1.0 / n);
    const auto ok = buc_lim_check(shifted, f, k);
    CHECK(ok.pass);
    CHECK(ok.bounded);

    std::vector<GridFunction> osc;
    for (int n = 1; n <= 60; ++n) osc.push_back(GridFunction::sample(g, [n](double x) { return std::sin(n * x); }));
    const auto bad = buc_lim_check(osc, GridFunction::constant(g, 0.0), k);
    CHECK_FALSE(bad.pass);
    CHECK(bad.deviations[0].back() > 0.5);

    std::vector<GridFunction> growing;
    for (int n = 1; n <= 30; ++n) growing.push_back(GridFunction::constant(g, n));
    const auto unbounded = buc_lim_check(growing, GridFunction::constant(g, 0.0), k);
    CHECK_FALSE(unbounded.pass);
    CHECK_FALSE(unbounded.bounded);

    // Monotone in tol.
    BucOptions loose;
    loose.tol = 0.05;
    std::vector<GridFunction> slow;
    for (int n = 1; n <= 30; ++n) slow.push_back(f + 0.9 / n);
    const auto tight = buc_lim_check(slow, f, k);
    if (tight.pass) CHECK(buc_lim_check(slow, f, k, loose).pass);
    CHECK(buc_lim_check(slow, f, k, loose).pass);

    const StateGrid other(0.0, 1.0, 51);
    const std::vector<GridFunction> mismatched{GridFunction::constant(other, 0.0)};
    CHECK_THROWS_AS(buc_lim_check(mismatched, f, k), ConfigError);
}

TEST_CASE("kuratowski_bounds examples") {
    const StateGrid g(-1.0, 4.0, 501);
    const std::vector<IntervalUnion> constant(6, IntervalUnion{{0.0, 1.0}});
    const auto c = kuratowski_bounds(constant, g);
    REQUIRE(c.liminf.size() == 1);
    REQUIRE(c.limsup.size() == 1);
    CHECK(c.liminf[0].lo == doctest::Approx(0.0));
    CHECK(c.liminf[0].hi == doctest::Approx(1.0));

    std::vector<IntervalUnion> alternating;
    for (int n = 0; n < 12; ++n) alternating.push_back(n % 2 ? IntervalUnion{{2.0, 3.0}} : IntervalUnion{{0.0, 1.0}});
    const auto a = kuratowski_bounds(alternating, g);
    CHECK(a.liminf.empty());
    REQUIRE(a.limsup.size() == 2);
    CHECK(a.limsup[0].lo == doctest::Approx(0.0));
    CHECK(a.limsup[1].hi == doctest::Approx(3.0));

    std::vector<IntervalUnion> shrinking;
    for (int n = 1; n <= 300; ++n) shrinking.push_back({{0.0, 1.0 + 1.0 / n}});
    const auto s = kuratowski_bounds(shrinking, g);
    REQUIRE(s.liminf.size() == 1);
    CHECK(std::abs(s.liminf[0].hi - 1.0) <= g.spacing());
    CHECK(std::abs(s.limsup[0].hi - 1.0) <= g.spacing());

    // liminf is contained in limsup.
    for (const auto& piece : a.liminf) {
        bool inside = false;
        for (const auto& big : a.limsup) inside = inside || (big.lo <= piece.lo && piece.hi <= big.hi);
        CHECK(inside);
    }
    CHECK_THROWS_AS(kuratowski_bounds(std::vector<IntervalUnion>{}, g), ConfigError);
}
