#include <cmath>
#include <numbers>

#include "hjgamma/errors.hpp"
#include "hjgamma/gamma.hpp"

namespace hjgamma {

void Scenario::validate(double min_tolerance) const {
    if (members.empty()) throw ConfigError("scenario '" + name + "' has no members");
    if (!(dt > 0.0)) throw ConfigError("scenario '" + name + "' needs dt > 0");
    const double vmax = limit_lagrangian.vmax();
    const std::size_t samples = limit_lagrangian.velocity_nodes();
    auto check = [&](const LagrangianModel& lag, const GridFunction& i0, const std::string& which) {
        if (!(i0.grid() == grid)) throw ConfigError(which + " initial cost is not on the scenario grid");
        if (lag.vmax() != vmax || lag.velocity_nodes() != samples) {
            throw ConfigError(which + " does not share the scenario velocity window");
        }
        if (i0.min() < 0.0) throw ConfigError(which + " initial cost is negative");
        const auto d = diagnose(lag, grid);
        if (!d.nonnegative) throw ConfigError(which + " Lagrangian takes negative values");
        if (d.max_min_over_v > min_tolerance) {
            throw ConfigError(which + " Lagrangian has min_v L = " + std::to_string(d.max_min_over_v) +
                              " > 0 somewhere on the grid");
        }
    };
    for (std::size_t i = 0; i < members.size(); ++i) {
        check(members[i].lagrangian, members[i].initial_cost, "member n=" + std::to_string(members[i].n));
        if (i > 0 && !(members[i].n > members[i - 1].n)) throw ConfigError("scenario n values must increase");
    }
    check(limit_lagrangian, limit_initial_cost, "limit");
}

SemigroupOperator Scenario::semigroup(std::size_t member) const {
    return SemigroupOperator(members.at(member).lagrangian, grid, dt);
}

SemigroupOperator Scenario::limit_semigroup() const { return SemigroupOperator(limit_lagrangian, grid, dt); }

std::vector<double> Scenario::ns() const {
    std::vector<double> out;
    for (const auto& m : members) out.push_back(m.n);
    return out;
}

double sqrt_mean_squared_coefficient(std::size_t points) {
    double s = 0.0;
    for (std::size_t k = 0; k < points; ++k) {
        s += std::sqrt(2.0 + std::sin(2.0 * std::numbers::pi * (k + 0.5) / points));
    }
    s /= static_cast<double>(points);
    return s * s;
}

double harmonic_mean_coefficient(std::size_t points) {
    double s = 0.0;
    for (std::size_t k = 0; k < points; ++k) {
        s += 1.0 / (2.0 + std::sin(2.0 * std::numbers::pi * (k + 0.5) / points));
    }
    return static_cast<double>(points) / s;
}

namespace {

GridFunction bowl(const StateGrid& grid, const ScenarioOptions& o, double shift) {
    return GridFunction::sample(grid, [&](double x) {
        const double d = x - o.initial_center - shift;
        if (std::abs(x - o.initial_center) > o.initial_radius) return kSentinel;
        return o.initial_weight * d * d;
    });
}

LagrangianModel shifted_quadratic(double a, double b, const ScenarioOptions& o) {
    return LagrangianModel::quadratic([a](double) { return a; }, [b](double) { return b; }, a, std::abs(b), o.vmax,
                                      o.velocity_samples);
}

Scenario skeleton(const std::string& name, const ScenarioOptions& o, LagrangianModel limit) {
    StateGrid grid(o.lower, o.upper, o.nodes);
    if (o.ns.empty()) throw ConfigError("scenario needs at least one n");
    GridFunction i0 = bowl(grid, o, 0.0);
    return Scenario{name, "", "", grid, o.dt, {}, std::move(limit), std::move(i0),
                    RecoveryPolicy::Constructed, {}};
}

}  // namespace

std::vector<std::string> builtin_scenario_names() {
    return {"identity", "drift", "homogenization", "broken-recovery"};
}

Scenario make_scenario(const std::string& name, const ScenarioOptions& o) {
    if (name == "identity") {
        auto s = skeleton(name, o, shifted_quadratic(1.0, 0.0, o));
        s.description = "L_n = L = v^2/2, I0_n = I0";
        s.oracle = "constant trace equal to the limit";
        s.recovery = RecoveryPolicy::Identity;
        for (double n : o.ns) s.members.push_back({n, s.limit_lagrangian, s.limit_initial_cost});
        s.validate();
        return s;
    }
    if (name == "drift") {
        auto s = skeleton(name, o, shifted_quadratic(1.0, 1.0, o));
        s.description = "L_n = (v - (1 + 1/n))^2/2 -> (v - 1)^2/2, I0_n centered at 0.1/n";
        s.oracle = "shifted-quadratic rate (y - x - b t)^2 / (2 t)";
        s.parameters = {{"b_limit", 1.0}, {"initial_shift", 0.1}};
        for (double n : o.ns) {
            s.members.push_back({n, shifted_quadratic(1.0, 1.0 + 1.0 / n, o), bowl(s.grid, o, 0.1 / n)});
        }
        s.validate();
        return s;
    }
    if (name == "homogenization") {
        // The limit is the Cauchy-Schwarz effective coefficient for oscillation in the state
        // variable; the harmonic mean is kept as metadata for comparison.
        const double abar = sqrt_mean_squared_coefficient();
        auto s = skeleton(name, o,
                          LagrangianModel::quadratic([abar](double) { return abar; }, [](double) { return 0.0; },
                                                     abar, 0.0, o.vmax, o.velocity_samples));
        s.description = "L_n = a(n x) v^2/2, a(x) = 2 + sin(2 pi x)";
        s.oracle = "effective coefficient (int sqrt a)^2 by 1e5-point quadrature; harmonic mean reported";
        s.parameters = {{"effective_coefficient", abar}, {"harmonic_mean", harmonic_mean_coefficient()}};
        for (double n : o.ns) {
            auto lag = LagrangianModel::quadratic(
                [n](double x) { return 2.0 + std::sin(2.0 * std::numbers::pi * n * x); },
                [](double) { return 0.0; }, 1.0, 0.0, o.vmax, o.velocity_samples);
            s.members.push_back({n, std::move(lag), s.limit_initial_cost});
        }
        s.validate();
        return s;
    }
    if (name == "broken-recovery") {
        auto s = skeleton(name, o, shifted_quadratic(1.0, 1.0, o));
        s.description = "L_n = n^2 (v - 2)^2/2 against a claimed limit (v - 1)^2/2";
        s.oracle = "recovery points drift to x + 2 t instead of y; limsup check must fail";
        for (double n : o.ns) s.members.push_back({n, shifted_quadratic(n * n, 2.0, o), s.limit_initial_cost});
        s.validate();
        return s;
    }
    throw ConfigError("unknown scenario '" + name + "'");
}

Scenario make_parametric_scenario(const std::string& name, const ParametricQuadratic& p, const ScenarioOptions& o) {
    if (!(p.a0 - std::abs(p.a1) > 0.0)) throw ConfigError("inline scenario needs a0 > |a1|");
    if (p.a1 != 0.0 && !p.limit_a) throw ConfigError("inline scenario with oscillation needs limit_a");
    const double la = p.limit_a.value_or(p.a0);
    const double lb = p.limit_b.value_or(p.b0);
    if (!(la > 0.0)) throw ConfigError("inline scenario needs limit_a > 0");
    auto s = skeleton(name, o, shifted_quadratic(la, lb, o));
    s.description = "inline: a_n = a0 + a1 sin(2 pi k n x), b_n = b0 + b1/n";
    s.oracle = "user-supplied limit coefficients";
    s.parameters = {{"a0", p.a0}, {"a1", p.a1}, {"frequency", p.frequency}, {"b0", p.b0},
                    {"b1", p.b1}, {"limit_a", la}, {"limit_b", lb}};
    for (double n : o.ns) {
        const double a0 = p.a0, a1 = p.a1, k = p.frequency, b = p.b0 + p.b1 / n;
        auto lag = LagrangianModel::quadratic(
            [=](double x) { return a0 + a1 * std::sin(2.0 * std::numbers::pi * k * n * x); },
            [b](double) { return b; }, a0 - std::abs(a1), std::abs(b), o.vmax, o.velocity_samples);
        s.members.push_back({n, std::move(lag), s.limit_initial_cost});
    }
    s.validate();
    return s;
}

}  // namespace hjgamma
