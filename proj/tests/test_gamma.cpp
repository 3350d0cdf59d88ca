#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hjgamma/errors.hpp"
#include "hjgamma/gamma.hpp"

using namespace hjgamma;

namespace {

ScenarioOptions small_options() {
    ScenarioOptions o;
    o.nodes = 201;
    o.velocity_samples = 161;
    o.dt = 0.02;
    o.ns = {1, 2, 4, 8, 16, 32};
    return o;
}

double tail_min(const std::vector<double>& v) { return *std::min_element(v.end() - 2, v.end()); }
double tail_max(const std::vector<double>& v) { return *std::max_element(v.end() - 2, v.end()); }

}  // namespace

TEST_CASE("Scenario library") {
    const auto names = builtin_scenario_names();
    for (const auto& name : {"identity", "drift", "homogenization", "broken-recovery"}) {
        CHECK(std::find(names.begin(), names.end(), name) != names.end());
        const auto s = make_scenario(name, small_options());
        CHECK_NOTHROW(s.validate());
        CHECK(s.ns().size() == 6);
    }
    CHECK_THROWS_AS(make_scenario("no-such-scenario"), ConfigError);
}

TEST_CASE("Homogenization coefficients") {
    // int_0^1 dx / (2 + sin 2 pi x) = 1 / sqrt(3).
    CHECK(harmonic_mean_coefficient() == doctest::Approx(std::sqrt(3.0)).epsilon(1e-9));
    const int n = 200000;
    double simpson = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        simpson += w * std::sqrt(2.0 + std::sin(2 * std::numbers::pi * i / n));
    }
    simpson /= 3.0 * n;
    CHECK(sqrt_mean_squared_coefficient() == doctest::Approx(simpson * simpson).epsilon(1e-9));

    const auto s = make_scenario("homogenization", small_options());
    CHECK(s.parameters.at("harmonic_mean") == doctest::Approx(std::sqrt(3.0)).epsilon(1e-9));
}

TEST_CASE("Liminf marginal on identity and drift") {
    const auto id = make_scenario("identity", small_options());
    const std::vector<double> xs(6, 0.0), ys(6, 1.0);
    const auto flat = gamma_liminf_marginal(id, 1.0, xs, ys, 0.0, 1.0);
    CHECK(flat.pass);
    for (double v : flat.trace) CHECK(v == doctest::Approx(flat.trace.front()));

    const auto drift = make_scenario("drift", small_options());
    const auto rec = gamma_liminf_marginal(drift, 1.0, xs, ys, 0.0, 1.0);
    CHECK(rec.pass);
    CHECK(std::abs(rec.limit) <= 5e-2);
    for (std::size_t k = 0; k < rec.ns.size(); ++k) {
        const double n = rec.ns[k];
        const double oracle = (1.0 - 0.0 - (1.0 + 1.0 / n)) * (1.0 - (1.0 + 1.0 / n)) / 2.0;
        CHECK(std::abs(rec.trace[k] - oracle) <= 5e-2);
    }

    const std::vector<double> wandering{0.0, 0.5, 0.0, 0.5, 0.0, 0.5};
    CHECK_FALSE(gamma_liminf_marginal(drift, 1.0, wandering, ys, 0.0, 1.0).pass);
}

TEST_CASE("Limsup marginal recovery construction") {
    const auto id = make_scenario("identity", small_options());
    const auto flat = gamma_limsup_marginal(id, 1.0, 0.0, 1.0);
    CHECK(flat.pass);
    for (double p : flat.recovery_points) CHECK(std::abs(p - 1.0) <= id.grid.spacing() * 2);

    const auto drift = make_scenario("drift", small_options());
    const auto rec = gamma_limsup_marginal(drift, 1.0, 0.0, 1.0);
    CHECK(rec.pass);
    CHECK(std::abs(rec.recovery_points.back() - 1.0) <= 2 * drift.grid.spacing());
    CHECK(tail_max(rec.trace) <= rec.limit + 5e-2);
    REQUIRE(rec.rungs.size() == rec.ns.size());
    for (const auto& rung : rec.rungs) {
        CHECK(rung.bound == doctest::Approx(rec.limit + 4 * rung.epsilon));
        CHECK(rung.holds);
        CHECK(rung.value <= rung.bound);
    }

    // Sandwich: both sides bracket the limit.
    const std::vector<double> xs(6, 0.0), ys(6, 1.0);
    const auto low = gamma_liminf_marginal(drift, 1.0, xs, ys, 0.0, 1.0);
    CHECK(tail_min(low.trace) >= low.limit - 2 * 5e-2);
    CHECK(tail_max(rec.trace) <= rec.limit + 2 * 5e-2);

    const auto broken = make_scenario("broken-recovery", small_options());
    const auto bad = gamma_limsup_marginal(broken, 1.0, 0.0, 1.0);
    CHECK_FALSE(bad.pass);
    CHECK(std::abs(bad.recovery_points.back() - 1.0) > 2 * broken.grid.spacing());
    CHECK(bad.detail.find("recovery point selection") != std::string::npos);
}

TEST_CASE("Equicoercivity diagnostic") {
    const auto id = make_scenario("identity", small_options());
    const auto compacts = default_compacts(id.grid);
    const auto d = equicoercivity_diagnostic(id, 0.5, 32, compacts);
    CHECK(d.c_l == doctest::Approx(1.0));
    CHECK(d.modulus_constant == doctest::Approx(1.0));
    CHECK(d.modulus_holds);
    CHECK(d.accepted >= 1);
    CHECK(d.accepted <= d.sampled);
    // I0 <= 1/2 means |x0| <= sqrt(1/2); each marginal moves at most sqrt(2 M t) <= 1.
    CHECK(d.sampled_lo >= -std::sqrt(0.5) - 1.0 - 1e-3);
    CHECK(d.sampled_hi <= std::sqrt(0.5) + 1.0 + 1e-3);

    const auto zero = equicoercivity_diagnostic(id, 0.0, 32, compacts);
    CHECK(zero.accepted >= 1);
    CHECK(zero.sampled_hi - zero.sampled_lo <= 1e-9);
    REQUIRE(zero.sampled_q.has_value());
    CHECK(zero.sampled_q == compacts.smallest_containing(0.0, 0.0));

    // Implied compact index is monotone in M and T.
    std::optional<std::size_t> last;
    for (double m : {0.05, 0.2, 0.5}) {
        const auto di = equicoercivity_diagnostic(id, m, 8, compacts);
        REQUIRE(di.implied_q.has_value());
        if (last) CHECK(*di.implied_q >= *last);
        last = di.implied_q;
    }
    CoercivityOptions longer;
    longer.horizon = 2.0;
    const auto dt = equicoercivity_diagnostic(id, 0.2, 8, compacts, longer);
    const auto ds = equicoercivity_diagnostic(id, 0.2, 8, compacts);
    CHECK(*dt.implied_q >= *ds.implied_q);

    const auto homog = make_scenario("homogenization", small_options());
    const auto h = equicoercivity_diagnostic(homog, 0.5, 16, compacts);
    CHECK(h.c_l == doctest::Approx(1.0));
    CHECK(h.modulus_holds);
}

TEST_CASE("Path check on identity and drift") {
    const std::vector<std::vector<double>> partitions{{0.0, 1.0}, {0.0, 0.5, 1.0}};
    const auto path = Path::straight(0.0, 1.0, 1.0);

    const auto id = make_scenario("identity", small_options());
    const auto ri = gamma_path_check(id, path, partitions);
    CHECK(ri.pass);

    const auto drift = make_scenario("drift", small_options());
    const auto rd = gamma_path_check(drift, path, partitions);
    for (const auto& r : rd.records) {
        INFO(r.check << ": " << r.detail);
        CHECK(r.pass);
    }
    CHECK(rd.pass);

    // No laundering: aggregate pass implies every record passes.
    const auto broken = make_scenario("broken-recovery", small_options());
    const auto rb = gamma_path_check(broken, path, partitions);
    CHECK_FALSE(rb.pass);
    bool any_failed = false;
    for (const auto& r : rb.records) any_failed = any_failed || !r.pass;
    CHECK(any_failed);
    const auto path_limsup = std::find_if(rb.records.begin(), rb.records.end(),
                                          [](const GammaRecord& r) { return r.check == "path_limsup"; });
    REQUIRE(path_limsup != rb.records.end());
    CHECK_FALSE(path_limsup->pass);
}

TEST_CASE("Extended limit examples") {
    const StateGrid g(-2.0, 3.0, 201);
    const auto compacts = default_compacts(g);
    const auto l = LagrangianModel::constant_quadratic(1.0, 0.0, 4.0, 161);
    const auto h = hamiltonian_of(l, g, 3.0, 61);
    const auto f = GridFunction::sample(g, [](double x) { return std::sin(x); });
    const std::vector<GridFunction> same(6, f);
    const std::vector<HamiltonianModel> hs(6, h);
    CHECK(extended_limit_check(same, f, hs, h, compacts).pass);

    // Drift: H_n(x, 1) = b_n + 1/2 -> b + 1/2.
    const auto line = GridFunction::sample(g, [](double x) { return x; });
    std::vector<HamiltonianModel> drifting;
    for (double n : {1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0}) {
        drifting.push_back(hamiltonian_of(LagrangianModel::constant_quadratic(1.0, 1.0 + 1.0 / n, 4.0, 161), g, 1.5, 31));
    }
    const auto limit = hamiltonian_of(LagrangianModel::constant_quadratic(1.0, 1.0, 4.0, 161), g, 1.5, 31);
    const std::vector<GridFunction> lines(drifting.size(), line);
    const auto ok = extended_limit_check(lines, line, drifting, limit, compacts, 5e-2);
    CHECK(ok.pass);
    const auto applied = apply_hamiltonian(limit, line);
    for (std::size_t i = 0; i < g.nodes(); i += 20) CHECK(applied[i] == doctest::Approx(1.5).epsilon(1e-9));

    std::vector<GridFunction> wiggly;
    for (int n = 1; n <= 9; ++n) wiggly.push_back(GridFunction::sample(g, [n](double x) { return std::sin(x) + std::sin(n * x); }));
    // Slopes of sin(n x) reach n, so this case needs a wide momentum window.
    const auto wide = hamiltonian_of(LagrangianModel::constant_quadratic(1.0, 0.0, 12.0, 481), g, 11.0, 45);
    const std::vector<HamiltonianModel> hs9(9, wide);
    const auto bad = extended_limit_check(wiggly, f, hs9, wide, compacts);
    CHECK_FALSE(bad.pass);
    CHECK_FALSE(bad.functions.pass);
}
