#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "hjgamma/errors.hpp"
#include "hjgamma/legendre.hpp"

using namespace hjgamma;

namespace {

// Dense brute-force conjugate used as an independent oracle.
double dense_conjugate(const std::function<double(double)>& l, double p, double vmax, int samples) {
    double best = -INFINITY;
    for (int i = 0; i < samples; ++i) {
        const double v = -vmax + 2.0 * vmax * i / (samples - 1);
        best = std::max(best, p * v - l(v));
    }
    return best;
}

}  // namespace

TEST_CASE("legendre_transform examples") {
    const auto quad = LagrangianModel::constant_quadratic(1.0, 0.0, 4.0, 801);
    CHECK(legendre_transform(quad, 0.0, 1.0) == doctest::Approx(0.5).epsilon(1e-9));

    const auto abs_v = LagrangianModel::power(1.0, 2.0, 401);
    CHECK(legendre_transform(abs_v, 0.0, 0.5) == doctest::Approx(0.0));

    const auto quartic = LagrangianModel::power(4.0, 3.0, 1201);
    const double oracle = dense_conjugate([](double v) { return std::pow(v, 4) / 4; }, 1.0, 3.0, 200001);
    CHECK(oracle == doctest::Approx(0.75).epsilon(1e-6));
    CHECK(legendre_transform(quartic, 0.0, 1.0) == doctest::Approx(oracle).epsilon(1e-4));
}

TEST_CASE("legendre_transform rejects a boundary maximiser") {
    const auto quad = LagrangianModel::constant_quadratic(1.0, 0.0, 1.0, 101);
    CHECK_THROWS_AS(legendre_transform(quad, 0.0, 3.0), WindowError);
}

TEST_CASE("hamiltonian_of examples") {
    const StateGrid g(-1.0, 1.0, 11);
    for (double a : {1.0, 2.0, 0.5}) {
        const auto l = LagrangianModel::constant_quadratic(a, 0.0, 6.0, 1201);
        const auto h = hamiltonian_of(l, g, 1.0, 41);
        for (double p : h.momenta()) CHECK(h.at(0.3, p) == doctest::Approx(p * p / (2 * a)).epsilon(1e-3));
    }
    const auto shifted = LagrangianModel::constant_quadratic(1.0, 1.0, 6.0, 1201);
    const auto h = hamiltonian_of(shifted, g, 2.0, 41);
    CHECK(h.at(0.0, 1.0) == doctest::Approx(1.5).epsilon(1e-4));
    CHECK(h.provenance() == HamiltonianProvenance::Conjugated);

    const auto exact = analytic_hamiltonian(shifted, g, 2.0, 41);
    CHECK(exact.at(0.2, 1.0) == doctest::Approx(1.5));
    CHECK(exact.provenance() == HamiltonianProvenance::Analytic);
}

TEST_CASE("biconjugate_check examples") {
    const StateGrid g(-1.0, 1.0, 5);
    const auto quad = LagrangianModel::constant_quadratic(1.0, 0.0, 4.0, 801);
    BiconjugateOptions opts;
    opts.momentum_samples = 801;
    opts.momentum_window = 4.0;
    const auto q = biconjugate_check(quad, g, opts);
    CHECK(q.pass);
    CHECK(q.max_gap <= 1e-6);

    const auto abs_v = LagrangianModel::power(1.0, 2.0, 401);
    BiconjugateOptions abs_opts;
    abs_opts.tol = 2.0 * 4.0 / 400;
    abs_opts.momentum_window = 1.0;
    abs_opts.momentum_samples = 401;
    const auto a = biconjugate_check(abs_v, g, abs_opts);
    CHECK(a.max_gap <= 2.0 * 2.0 / 400 + 1e-12);

    const auto well = LagrangianModel::tabulated(g, 2.0, 801, [](double, double v) {
        return std::pow(v, 4) / 4 - v * v / 2 + 0.25;
    });
    BiconjugateOptions well_opts;
    well_opts.momentum_window = 3.0;
    well_opts.check_window = 1.5;
    const auto w = biconjugate_check(well, g, well_opts);
    CHECK_FALSE(w.convex);
    CHECK(w.expected_failure);
    CHECK_FALSE(w.pass);
    // The hull of v^4/4 - v^2/2 is flat at -1/4 on [-1, 1]; the gap is 1/4 at v = 0.
    CHECK(w.max_gap == doctest::Approx(0.25).epsilon(1e-3));
    CHECK(std::abs(w.gap_velocity) <= 0.01);

    // Shifted quadratic, default windows: v = -2 needs p = -3, outside |p| <= 2.
    const auto shifted = LagrangianModel::constant_quadratic(1.0, 1.0, 4.0, 161);
    const auto s = biconjugate_check(shifted, g);
    CHECK(s.pass);
    CHECK(s.skipped_velocities > 0);
    CHECK(s.max_gap <= 1e-2);
    BiconjugateOptions wide;
    wide.momentum_window = 4.0;
    const auto sw = biconjugate_check(shifted, g, wide);
    CHECK(sw.pass);
    CHECK(sw.skipped_velocities == 0);
    // |v| above: p = +-1 is the edge of dom H, so nothing was skipped there.
    CHECK(a.skipped_velocities == 0);
}

TEST_CASE("Young-Fenchel inequality and conjugate convexity") {
    const StateGrid g(-1.0, 1.0, 9);
    const auto l = LagrangianModel::quadratic([](double x) { return 2.0 + std::sin(2 * std::numbers::pi * x); },
                                              [](double x) { return 0.5 * std::cos(x); }, 1.0, 0.5, 5.0, 501);
    const auto h = hamiltonian_of(l, g, 1.5, 31);
    for (std::size_t i = 0; i < g.nodes(); ++i) {
        const double x = g.node(i);
        for (double p : h.momenta()) {
            for (double v : l.velocities()) CHECK(p * v <= l(x, v) + h.at(x, p) + 1e-9);
        }
        for (std::size_t j = 1; j + 1 < h.momenta().size(); ++j) {
            CHECK(h.table(i, j - 1) - 2 * h.table(i, j) + h.table(i, j + 1) >= -1e-9);
        }
        double min_l = INFINITY;
        for (double v : l.velocities()) min_l = std::min(min_l, l(x, v));
        CHECK(h.at(x, 0.0) == doctest::Approx(-min_l).epsilon(1e-12));
        // The continuum minimum is 0; samples sit within a spacing of b(x).
        CHECK(std::abs(h.at(x, 0.0)) <= 3.0 * 0.02 * 0.02 / 2);
    }
}

TEST_CASE("Enlarging the window never lowers the conjugate") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const auto narrow = LagrangianModel::constant_quadratic(1.0, 0.2, 3.0, 301);
    const auto wide = narrow.with_window(6.0, 601);
    for (int k = 0; k < 50; ++k) {
        const double p = u(rng);
        CHECK(legendre_transform(wide, 0.0, p) >= legendre_transform(narrow, 0.0, p) - 1e-12);
    }
}

TEST_CASE("diagnose flags convexity and window problems") {
    const StateGrid g(-1.0, 1.0, 5);
    const auto ok = diagnose(LagrangianModel::constant_quadratic(1.0, 0.0, 2.0, 101), g);
    CHECK(ok.nonnegative);
    CHECK(ok.convex);
    CHECK(ok.window_adequate);

    const auto well = diagnose(
        LagrangianModel::tabulated(g, 2.0, 101, [](double, double v) { return std::pow(v, 4) / 4 - v * v / 2 + 0.25; }),
        g);
    CHECK_FALSE(well.convex);

    const auto off = diagnose(LagrangianModel::constant_quadratic(1.0, 3.0, 2.0, 101), g);
    CHECK_FALSE(off.window_adequate);

    CHECK_THROWS_AS(LagrangianModel::power(0.5, 1.0, 11), ConfigError);
}
