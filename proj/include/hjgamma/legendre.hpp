#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "hjgamma/grid.hpp"

namespace hjgamma {

using CoefficientFn = std::function<double(double)>;

// L(x, v) = a(x) (v - b(x))^2 / 2 with a(x) >= a_min > 0 and |b(x)| <= b_max.
struct QuadraticKind {
    CoefficientFn a;
    CoefficientFn b;
    double a_min;
    double b_max;
};

// L(x, v) = |v|^p / p, p >= 1.
struct PowerKind {
    double exponent;
};

// L sampled on (state grid) x (velocity samples); bilinear in between.
struct TabulatedKind {
    StateGrid grid;
    std::vector<double> table;  // row-major, grid.nodes() rows
};

/**
 * Running cost L(x, v) together with the finite velocity sample set used by every
 * maximisation in the library. Outside the velocity window L is treated as +inf.
 */
class LagrangianModel {
public:
    using Kind = std::variant<QuadraticKind, PowerKind, TabulatedKind>;

    static LagrangianModel quadratic(CoefficientFn a, CoefficientFn b, double a_min, double b_max,
                                     double vmax, std::size_t velocity_nodes);
    static LagrangianModel constant_quadratic(double a, double b, double vmax, std::size_t velocity_nodes);
    static LagrangianModel power(double exponent, double vmax, std::size_t velocity_nodes);
    static LagrangianModel tabulated(const StateGrid& grid, double vmax, std::size_t velocity_nodes,
                                     const std::function<double(double, double)>& fn);

    double operator()(double x, double v) const;

    double vmax() const { return vmax_; }
    std::size_t velocity_nodes() const { return velocities_.size(); }
    std::span<const double> velocities() const { return velocities_; }
    const Kind& kind() const { return kind_; }
    bool is_quadratic() const { return std::holds_alternative<QuadraticKind>(kind_); }

    // Same model on a different velocity window (same kind and sample spacing policy).
    LagrangianModel with_window(double vmax, std::size_t velocity_nodes) const;

    // b p + p^2 / (2 a) for the quadratic kind.
    std::optional<double> closed_form_hamiltonian(double x, double p) const;

    struct QuadraticBound {
        double c_l;    // L >= c_l (v - b(x))^2 / 2
        double b_max;  // |b(x)| <= b_max
    };
    std::optional<QuadraticBound> quadratic_lower_bound() const;

    // Minimum of L(x, .) over the samples is attained strictly inside the window.
    bool window_adequate(double x) const;

private:
    LagrangianModel(Kind kind, double vmax, std::size_t velocity_nodes);

    Kind kind_;
    double vmax_;
    std::vector<double> velocities_;
};

struct LagrangianDiagnostics {
    bool nonnegative = true;
    bool convex = true;
    bool window_adequate = true;
    double min_value = 0.0;        // min over (node, sample) of L
    double max_min_over_v = 0.0;   // max over nodes of min_v L(x, v)
    double worst_second_difference = 0.0;
};

LagrangianDiagnostics diagnose(const LagrangianModel& lagrangian, const StateGrid& grid);

enum class HamiltonianProvenance { Conjugated, Analytic };

/**
 * H(x, p) tabulated on grid nodes x momentum samples. Analytic models also carry the
 * closed form and evaluate it directly.
 */
class HamiltonianModel {
public:
    HamiltonianModel(StateGrid grid, std::vector<double> momenta, std::vector<double> table,
                     HamiltonianProvenance provenance,
                     std::function<double(double, double)> analytic = {});

    double at(double x, double p) const;

    const StateGrid& grid() const { return grid_; }
    std::span<const double> momenta() const { return momenta_; }
    double momentum_window() const { return momenta_.back(); }
    HamiltonianProvenance provenance() const { return provenance_; }
    double table(std::size_t node, std::size_t j) const { return table_[node * momenta_.size() + j]; }

private:
    StateGrid grid_;
    std::vector<double> momenta_;
    std::vector<double> table_;
    HamiltonianProvenance provenance_;
    std::function<double(double, double)> analytic_;
};

std::vector<double> symmetric_samples(double half_width, std::size_t count);

// max over velocity samples of p v - L(x, v). Throws WindowError if the maximiser is a
// boundary sample. Ties go to the smallest sample index.
double legendre_transform(const LagrangianModel& lagrangian, double x, double p);

struct ConjugatePoint {
    double value;
    std::size_t argmax;
};
ConjugatePoint legendre_transform_detail(const LagrangianModel& lagrangian, double x, double p);

HamiltonianModel hamiltonian_of(const LagrangianModel& lagrangian, const StateGrid& grid,
                                double momentum_window, std::size_t momentum_samples);

// Closed-form conjugate of a quadratic model, tabulated for inspection.
HamiltonianModel analytic_hamiltonian(const LagrangianModel& lagrangian, const StateGrid& grid,
                                      double momentum_window, std::size_t momentum_samples);

struct BiconjugateOptions {
    double tol = 1e-6;
    std::optional<double> momentum_window;  // default vmax / 2
    std::optional<std::size_t> momentum_samples;  // default: velocity sample count
    std::optional<double> check_window;     // default vmax / 2
};

struct BiconjugateReport {
    bool pass = false;
    bool convex = true;
    bool expected_failure = false;  // non-convex input: gap measures the hull distance
    double max_gap = 0.0;
    double gap_state = 0.0;
    double gap_velocity = 0.0;
    std::size_t skipped_momenta = 0;  // conjugate undefined inside the velocity window
    std::size_t skipped_velocities = 0;  // maximising momentum on the window edge, not tested
};

BiconjugateReport biconjugate_check(const LagrangianModel& lagrangian, const StateGrid& grid,
                                    const BiconjugateOptions& options = {});

}  // namespace hjgamma
