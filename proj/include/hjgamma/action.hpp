#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "hjgamma/control.hpp"
#include "hjgamma/grid.hpp"
#include "hjgamma/legendre.hpp"

namespace hjgamma {

/// Piecewise-linear trajectory through (knot time, state) pairs, starting at time 0.
class Path {
public:
    Path(std::vector<double> knots, std::vector<double> states);

    static Path straight(double t0_state, double t1_state, double horizon, std::size_t segments = 1);

    std::span<const double> knots() const { return knots_; }
    std::span<const double> states() const { return states_; }
    double end_time() const { return knots_.back(); }

    double at(double t) const;
    double velocity(std::size_t segment) const;
    std::size_t segments() const { return knots_.size() - 1; }

    void require_within(const StateGrid& grid) const;

private:
    std::vector<double> knots_;
    std::vector<double> states_;
};

enum class Quadrature { Midpoint, Trapezoid };

/**
 * I(gamma) = I0(gamma(0)) + int_0^T L(gamma, gamma') ds on piecewise-linear paths.
 * I0 values at or above kSentinel stand for +inf and saturate the sum.
 */
struct PathFunctional {
    GridFunction initial_cost;
    LagrangianModel lagrangian;
    double horizon;
    Quadrature quadrature = Quadrature::Midpoint;
    int subdivisions = 64;  // quadrature cells per path segment
};

double path_action(const PathFunctional& functional, const Path& path);

struct PrimalRateOptions {
    std::size_t interior_knots = 3;
    // Midpoint points per segment. Quadratic models ignore this: their segment integrals
    // come from prefix sums of a, a b and a b^2 / 2 on a 16x refined grid.
    int quadrature_points = 8;
};

/// inf over piecewise-linear paths x -> y in time t with interior knots on grid nodes.
double conditional_rate_primal(const LagrangianModel& lagrangian, const StateGrid& grid, double t, double x,
                               double y, const PrimalRateOptions& options = {});

/// z -> conditional_rate_primal(t, x, z) on every grid node.
GridFunction rate_profile(const LagrangianModel& lagrangian, const StateGrid& grid, double t, double x,
                          const PrimalRateOptions& options = {});

/**
 * Isolating family based at y: f_m(z) = -m^2 min(|z - y|, cap), plus an optional
 * dictionary of extra test functions.
 */
struct TestFamily {
    double base = 0.0;
    std::vector<double> scales;
    double cap = 1.0;
    std::vector<GridFunction> dictionary;

    GridFunction member(double m, const StateGrid& grid) const;
    double value(double m, double z) const;
};

struct IsolationCheck {
    bool near_zero_at_base = true;  // |f_m(y)| <= 1/m
    bool nonpositive = true;        // sup f_m <= 0
    bool isolates = true;           // f_m <= -m off B_{1/m}(y)
};

IsolationCheck check_isolating(const TestFamily& family, double m, const StateGrid& grid);

struct DualRate {
    double value = 0.0;
    std::vector<double> per_member;  // scales first, then dictionary entries
    std::size_t best = 0;
};

/// max over family members of f(y) - V(t)f(x).
DualRate conditional_rate_dual(const SemigroupOperator& semigroup, double t, double x, double y,
                               const TestFamily& family);

enum class RateMode { Primal, Dual };

struct RateOptions {
    RateMode mode = RateMode::Dual;
    std::vector<double> scales{1.0, 2.0, 4.0, 8.0, 16.0};
    double cap = 1.0;
    PrimalRateOptions primal{};
};

double conditional_rate(const SemigroupOperator& semigroup, double t, double x, double y,
                        const RateOptions& options);

/// I0(x_0) + sum_i I_{t_i - t_{i-1}}(x_i | x_{i-1}).
double finite_dim_value(const GridFunction& initial_cost, const SemigroupOperator& semigroup,
                        std::span<const double> times, std::span<const double> points,
                        const RateOptions& options = {});

struct ProjectiveValue {
    double value = 0.0;
    std::vector<double> per_partition;
};

ProjectiveValue projective_supremum(const GridFunction& initial_cost, const SemigroupOperator& semigroup,
                                    const Path& path, std::span<const std::vector<double>> partitions,
                                    const RateOptions& options = {});

/// Lambda(f) = sup_x f(x) - J(x) over grid nodes.
double dual_functional_lambda(const GridFunction& rate, const GridFunction& f);

struct IsolatingRecovery {
    std::vector<double> scales;
    std::vector<double> values;  // -Lambda(f_m)
    double estimate = 0.0;       // last value
    double extrapolated = 0.0;   // J + C/m fit through the last two values
    bool finite_target = true;
    bool diverges = false;       // infinite case: values grow at least like m - sup f
};

IsolatingRecovery isolating_family_recover(const GridFunction& rate, double y, std::span<const double> scales,
                                           double cap = 1.0);

}  // namespace hjgamma
