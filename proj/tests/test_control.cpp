#include <doctest.h>

#include <cmath>
#include <random>

#include "hjgamma/control.hpp"
#include "hjgamma/errors.hpp"

using namespace hjgamma;

namespace {

GridFunction random_function(const StateGrid& g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double a = u(rng), b = 3.0 * u(rng), c = u(rng), d = u(rng);
    return GridFunction::sample(g, [=](double x) { return a * std::sin(b * x) + c * x + d * x * x / 4; });
}

// Discounted value of h(x) = x under L = v^2/2, maximised over piecewise-constant controls
// with `pieces` switches of length `piece`, then the last control held until truncation.
double enumerated_resolvent(double x, double lambda, const std::vector<double>& controls, int pieces, double piece) {
    const double horizon = 12.0 * lambda;
    const double step = 1e-3;
    double best = -INFINITY;
    std::vector<std::size_t> idx(pieces, 0);
    while (true) {
        double state = x, running = 0.0, total = 0.0;
        for (double t = 0.0; t < horizon; t += step) {
            const auto k = std::min<std::size_t>(static_cast<std::size_t>(t / piece), pieces - 1);
            const double v = controls[idx[k]];
            const double mid = t + step / 2;
            const double w = std::exp(-mid / lambda) / lambda;
            const double s_mid = state + v * step / 2;
            const double r_mid = running + v * v / 2 * step / 2;
            total += w * (s_mid - r_mid) * step;
            state += v * step;
            running += v * v / 2 * step;
        }
        total += std::exp(-horizon / lambda) * (state - running);
        best = std::max(best, total);
        int pos = 0;
        while (pos < pieces && ++idx[pos] == controls.size()) idx[pos++] = 0;
        if (pos == pieces) break;
    }
    return best;
}

}  // namespace

TEST_CASE("semigroup_apply examples") {
    const StateGrid g(-2.0, 2.0, 201);
    const auto l = LagrangianModel::constant_quadratic(1.0, 0.0, 4.0, 161);
    const SemigroupOperator v(l, g, 0.01);

    const auto c = GridFunction::constant(g, 0.7);
    const auto vc = v.apply(c, 0.5);
    for (std::size_t i = 0; i < g.nodes(); ++i) CHECK(vc[i] == doctest::Approx(0.7).epsilon(1e-12));

    const auto f = GridFunction::sample(g, [](double x) { return std::sin(x); });
    const auto zero = v.apply(f, 0.0);
    for (std::size_t i = 0; i < g.nodes(); ++i) CHECK(zero[i] == f[i]);

    const auto bowl = GridFunction::sample(g, [](double x) { return -x * x / 2; });
    const auto r = v.apply_detail(bowl, 1.0);
    CHECK(r.steps == 100);
    CHECK(r.snap == doctest::Approx(0.0));
    for (std::size_t i = 0; i < g.nodes(); ++i) {
        const double x = g.node(i);
        if (std::abs(x) <= 1.0) CHECK(std::abs(r.value[i] - (-x * x / 4)) <= 5e-2);
    }
    CHECK(r.value.max() <= bowl.max() + 1e-12);

    const auto snapped = v.apply_detail(bowl, 0.1234);
    CHECK(snapped.steps == 12);
    CHECK(snapped.snap == doctest::Approx(0.12 - 0.1234));

    CHECK_THROWS_AS(v.apply(bowl, -0.5), ConfigError);
    CHECK_THROWS_AS(SemigroupOperator(l, g, 0.0), ConfigError);
}

TEST_CASE("Semigroup law") {
    const StateGrid g(-2.0, 2.0, 201);
    const auto l = LagrangianModel::constant_quadratic(1.0, 0.0, 4.0, 161);
    const SemigroupOperator v(l, g, 0.01);
    const auto f = GridFunction::sample(g, [](double x) { return -x * x / 2 + 0.3 * std::sin(2 * x); });
    for (auto [s, t] : {std::pair{0.2, 0.3}, std::pair{0.5, 0.5}, std::pair{0.1, 0.7}}) {
        const auto lhs = v.apply(v.apply(f, t), s);
        const auto rhs = v.apply(f, s + t);
        CHECK(sup_norm(lhs - rhs) <= 5e-2);
    }
}

TEST_CASE("resolvent_apply examples") {
    const StateGrid g(-2.0, 2.0, 201);
    const auto l = LagrangianModel::constant_quadratic(1.0, 0.0, 4.0, 161);
    const ResolventOperator r(l, g, 0.5, 0.01);

    const auto zero = r.apply_detail(GridFunction::constant(g, 0.0));
    CHECK(sup_norm(zero.value) <= r.tolerance());

    const auto c = r.apply(GridFunction::constant(g, -1.3));
    for (std::size_t i = 0; i < g.nodes(); ++i) CHECK(c[i] == doctest::Approx(-1.3).epsilon(1e-7));

    const auto h = GridFunction::sample(g, [](double x) { return x; });
    const auto detail = r.apply_detail(h);
    CHECK(detail.residual <= r.tolerance());
    CHECK(detail.worst_ratio <= std::exp(-0.01 / 0.5) + 1e-3);

    const std::vector<double> controls{0.0, 0.5, 1.0, 1.5};
    for (double x : {-1.5, -1.0, -0.5}) {
        const double oracle = enumerated_resolvent(x, 0.5, controls, 3, 0.5);
        CHECK(std::abs(detail.value(x) - oracle) <= 5e-2);
    }
}

TEST_CASE("Resolvent non-convergence raises") {
    const StateGrid g(-1.0, 1.0, 21);
    const auto l = LagrangianModel::constant_quadratic(1.0, 0.0, 2.0, 21);
    const ResolventOperator r(l, g, 5.0, 0.01, 1e-12, 5);
    CHECK_THROWS_AS(r.apply(GridFunction::sample(g, [](double x) { return x; })), ConvergenceError);
}

TEST_CASE("pseudo_resolvent_residual examples") {
    const StateGrid g(-2.0, 2.0, 201);
    const auto l = LagrangianModel::constant_quadratic(1.0, 0.0, 4.0, 161);
    const auto factory = make_resolvent_factory(l, g, 0.01, 1e-8);
    CHECK(pseudo_resolvent_residual(factory, 0.5, 1.0, GridFunction::constant(g, 0.0)) <= 1e-8);

    const auto h = GridFunction::sample(g, [](double x) { return x; });
    CHECK(pseudo_resolvent_residual(factory, 0.5, 1.0, h) <= 5e-2);

    PseudoResolventOptions equal;
    equal.allow_equal = true;
    CHECK(pseudo_resolvent_residual(factory, 0.5, 0.5, h, equal) <= 1e-7);
    CHECK_THROWS_AS(pseudo_resolvent_residual(factory, 0.5, 0.5, h), ConfigError);
}

TEST_CASE("crandall_liggett_compare examples") {
    const StateGrid g(-2.0, 2.0, 201);
    const auto l = LagrangianModel::constant_quadratic(1.0, 0.0, 4.0, 161);
    const auto factory = make_resolvent_factory(l, g, 0.01, 1e-8);
    const SemigroupOperator v(l, g, 0.01);
    const std::vector<int> ns{1, 2, 4, 8, 16};

    for (const auto& p : crandall_liggett_compare(factory, v, GridFunction::constant(g, 2.0), 1.0, ns)) {
        CHECK(p.gap <= 1e-6);
    }
    const auto bowl = GridFunction::sample(g, [](double x) { return -x * x / 2; });
    for (const auto& p : crandall_liggett_compare(factory, v, bowl, 0.0, ns)) CHECK(p.gap == 0.0);

    const auto curve = crandall_liggett_compare(factory, v, bowl, 1.0, ns);
    REQUIRE(curve.size() == ns.size());
    for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i].gap <= curve[i - 1].gap + 1e-3);
    CHECK(curve.back().gap < curve.front().gap / 2);
}

TEST_CASE("Contraction and order preservation on seeded pairs") {
    const StateGrid g(-2.0, 2.0, 81);
    const auto l = LagrangianModel::constant_quadratic(1.0, 0.0, 4.0, 81);
    const SemigroupOperator v(l, g, 0.02);
    const ResolventOperator r(l, g, 0.2, 0.02);
    const Operator vt = [&](const GridFunction& f) { return v.apply(f, 0.4); };
    const Operator rl = [&](const GridFunction& f) { return r.apply(f); };

    std::mt19937_64 rng(2024);
    for (int k = 0; k < 100; ++k) {
        const auto f1 = random_function(g, rng);
        const auto f2 = random_function(g, rng);
        CHECK(contraction_check(vt, f1, f2).pass);
        CHECK(contraction_check(rl, f1, f2).pass);
        const auto upper = f1 + GridFunction::sample(g, [](double x) { return 1.0 + std::sin(3 * x); });
        CHECK(order_violation(vt, f1, upper) <= 1e-12);
        CHECK(order_violation(rl, f1, upper) <= 1e-12);
    }

    const auto f = random_function(g, rng);
    const auto same = contraction_check(vt, f, f);
    CHECK(same.pass);
    CHECK(same.violation == 0.0);

    const auto shifted = contraction_check(vt, f + 0.5, f);
    CHECK(shifted.pass);
    CHECK(sup_norm(vt(f + 0.5) - vt(f) - GridFunction::constant(g, 0.5)) <= 1e-12);
    CHECK(sup_norm(rl(f + 0.5) - rl(f) - GridFunction::constant(g, 0.5)) <= 1e-6);

    // An expansive map is caught.
    const Operator doubling = [](const GridFunction& h) { return h * 2.0; };
    CHECK_FALSE(contraction_check(doubling, f + 1.0, f).pass);
}

TEST_CASE("strict_equicontinuity_probe examples") {
    const StateGrid g(-2.0, 2.0, 81);
    const std::vector<double> radii{0.25, 0.5, 1.0, 1.5, 2.0};
    const auto compacts = CompactFamily::nested(g, 0.0, radii);
    const Operator identity = [](const GridFunction& h) { return h; };
    const std::vector<Operator> ids{identity};

    const auto base = GridFunction::sample(g, [](double x) { return std::cos(x); });
    const std::vector<FunctionPair> equal{{base, base}};
    const auto eq = strict_equicontinuity_probe(ids, compacts, 1, 0.1, equal);
    CHECK(eq.q_hat.has_value());
    CHECK(eq.residual <= 0.0);

    const auto bump = GridFunction::sample(g, [](double x) { return std::max(0.0, 1.0 - 4.0 * x * x); });
    const std::vector<FunctionPair> local{{base + bump, base}};
    const auto loc = strict_equicontinuity_probe(ids, compacts, 1, 0.1, local);
    REQUIRE(loc.q_hat.has_value());
    CHECK(*loc.q_hat <= 1);
    CHECK(loc.residual <= 0.0);

    // Finite speed: a bump outside K^q moves into it under V(t), so q_hat must reach it.
    const auto l = LagrangianModel::constant_quadratic(1.0, 0.0, 2.0, 81);
    const SemigroupOperator v(l, g, 0.02);
    const std::vector<Operator> flows{[&](const GridFunction& h) { return v.apply(h, 0.5); }};
    const auto far = GridFunction::sample(g, [](double x) { return std::max(0.0, 1.0 - 16.0 * (x - 0.9) * (x - 0.9)); });
    const std::vector<FunctionPair> translated{{far, GridFunction::constant(g, 0.0)}};
    const auto moved = strict_equicontinuity_probe(flows, compacts, 1, 0.1, translated);
    REQUIRE(moved.q_hat.has_value());
    CHECK(compacts.interval(*moved.q_hat).hi >= 0.5 + 0.2);
    CHECK(*moved.q_hat > 1);
}

TEST_CASE("resolvent_limit_probe approaches h as lambda shrinks") {
    const StateGrid g(-2.0, 2.0, 101);
    const auto l = LagrangianModel::constant_quadratic(1.0, 0.0, 4.0, 81);
    const auto factory = make_resolvent_factory(l, g, 0.01, 1e-8);
    const auto h = GridFunction::sample(g, [](double x) { return std::sin(x); });
    const std::vector<double> radii{0.5, 1.0};
    const auto compacts = CompactFamily::nested(g, 0.0, radii);
    const std::vector<double> lambdas{1.0, 0.5, 0.25, 0.1, 0.05, 0.02};
    BucOptions opts;
    opts.tol = 5e-2;
    const auto report = resolvent_limit_probe(factory, h, lambdas, compacts, opts);
    REQUIRE(report.buc.deviations.size() == 2);
    const auto& dev = report.buc.deviations[1];
    for (std::size_t i = 1; i < dev.size(); ++i) CHECK(dev[i] <= dev[i - 1] + 1e-9);
    // First order in lambda: R(lambda)h - h ~ lambda H(x, h') = lambda cos(x)^2 / 2.
    for (std::size_t i = 0; i < lambdas.size(); ++i) CHECK(dev[i] <= lambdas[i] / 2 + 0.01);
    CHECK(report.buc.pass);
}
