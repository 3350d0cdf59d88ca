#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hjgamma/action.hpp"
#include "hjgamma/control.hpp"
#include "hjgamma/grid.hpp"
#include "hjgamma/legendre.hpp"

namespace hjgamma {

enum class RecoveryPolicy { Identity, Constructed };

struct ScenarioMember {
    double n;
    LagrangianModel lagrangian;
    GridFunction initial_cost;
};

/**
 * A sequence (L_n, I0_n) with its claimed limit (L, I0). All members share the state
 * grid, the velocity window and the time step used for their semigroups.
 */
struct Scenario {
    std::string name;
    std::string description;
    std::string oracle;
    StateGrid grid;
    double dt;
    std::vector<ScenarioMember> members;
    LagrangianModel limit_lagrangian;
    GridFunction limit_initial_cost;
    RecoveryPolicy recovery = RecoveryPolicy::Constructed;
    std::map<std::string, double> parameters;

    // Throws ConfigError on a broken invariant (shared grid/window, L >= 0, min_v L = 0).
    void validate(double min_tolerance = 1e-3) const;

    SemigroupOperator semigroup(std::size_t member) const;
    SemigroupOperator limit_semigroup() const;
    std::vector<double> ns() const;
};

struct RecoveryRung {
    double n = 0.0;
    double epsilon = 0.0;
    double m = 0.0;
    bool m_found = false;  // all three conditions on m(epsilon) met within the ladder
    double point = 0.0;    // y_{n, epsilon}
    double value = 0.0;    // J^n(y_{n, epsilon} | x_n)
    double bound = 0.0;    // J(y | x) + 4 epsilon
    bool holds = false;
};

struct GammaRecord {
    std::string check;
    std::vector<double> ns;
    std::vector<double> trace;
    double limit = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string detail;
    std::vector<double> recovery_points;
    std::vector<RecoveryRung> rungs;
};

struct GammaReport {
    std::vector<GammaRecord> records;
    bool pass = true;

    void add(GammaRecord record);
};

struct GammaOptions {
    double tolerance = 5e-2;
    double tail_fraction = 1.0 / 3.0;
    RateOptions rate{};                   // liminf side and limit rates
    PrimalRateOptions profile{};          // J^n(. | x) used to place recovery points
    std::vector<double> recovery_scales;  // m ladder for m(epsilon); default 1..64
    double epsilon_offset = 4.0;          // epsilon_i = 1 / (offset + i) along the members
    double recovery_spacings = 2.0;       // final |y_n - y| allowed, in grid spacings
    double sequence_tolerance = 1e-9;     // convergence of supplied x_n, y_n
};

GammaRecord gamma_liminf_marginal(const Scenario& scenario, double t, std::span<const double> xs,
                                  std::span<const double> ys, double x, double y,
                                  const GammaOptions& options = {});

GammaRecord gamma_limsup_marginal(const Scenario& scenario, double t, double x, double y,
                                  const GammaOptions& options = {});

struct CoercivityOptions {
    double horizon = 1.0;
    std::size_t segments = 8;
    double noise = 1.0;  // velocity noise amplitude; sample 0 of each member is noise-free
    std::uint64_t seed = 0;
    double slack = 1e-3;
};

struct CoercivityDiagnostic {
    double bound = 0.0;            // M
    double c_l = 0.0;
    double b_max = 0.0;
    double modulus_constant = 0.0;  // sqrt(2 M / c_L)
    std::size_t sampled = 0;
    std::size_t accepted = 0;
    bool modulus_holds = true;
    double worst_excess = 0.0;  // max over accepted paths and knot pairs of |dx| - modulus
    double sampled_lo = 0.0;
    double sampled_hi = 0.0;
    double implied_lo = 0.0;
    double implied_hi = 0.0;
    std::optional<std::size_t> implied_q;  // smallest compact holding the guaranteed hull (cut to the grid)
    std::optional<std::size_t> sampled_q;  // smallest compact holding the accepted marginals
};

CoercivityDiagnostic equicoercivity_diagnostic(const Scenario& scenario, double bound, std::size_t samples,
                                               const CompactFamily& compacts,
                                               const CoercivityOptions& options = {});

struct PathCheckOptions {
    GammaOptions gamma{};
    CoercivityOptions coercivity{};
    double coercivity_bound = 0.5;
    std::size_t coercivity_samples = 32;
    std::optional<CompactFamily> compacts;  // default: nested around the grid center
    double semigroup_tolerance = 0.1;
    std::vector<double> semigroup_scales{1.0};
};

/**
 * Hypothesis pipeline along one path: equi-coercivity, I0_n against I0 on the grid,
 * V_n(t) f against V(t) f, then marginal liminf/limsup checks for every increment of
 * every partition and the path-level projective values.
 */
GammaReport gamma_path_check(const Scenario& scenario, const Path& path,
                             std::span<const std::vector<double>> partitions, const PathCheckOptions& options = {});

struct ExtendedLimitReport {
    bool pass = false;
    BucReport functions;
    BucReport hamiltonians;
};

// H_n f_n(x) = H_n(x, D f_n(x)) by central differences (one-sided at the ends).
GridFunction apply_hamiltonian(const HamiltonianModel& hamiltonian, const GridFunction& f);

ExtendedLimitReport extended_limit_check(std::span<const GridFunction> fs, const GridFunction& f,
                                         std::span<const HamiltonianModel> hs, const HamiltonianModel& h,
                                         const CompactFamily& compacts, double tol = 1e-2);

CompactFamily default_compacts(const StateGrid& grid);

// Built-in scenario library.
struct ScenarioOptions {
    double lower = -2.0;
    double upper = 3.0;
    std::size_t nodes = 401;
    double vmax = 4.0;
    std::size_t velocity_samples = 321;
    double dt = 1e-2;
    std::vector<double> ns{1, 2, 4, 8, 16, 32};
    double initial_center = 0.0;
    double initial_weight = 1.0;
    double initial_radius = 1.5;  // I0 sits at the sentinel beyond this distance
};

// Inline scenario: a_n(x) = a0 + a1 sin(2 pi k n x), b_n = b0 + b1 / n, limit (limit_a, limit_b).
struct ParametricQuadratic {
    double a0 = 1.0;
    double a1 = 0.0;
    double frequency = 1.0;
    double b0 = 0.0;
    double b1 = 0.0;
    std::optional<double> limit_a;
    std::optional<double> limit_b;
};

std::vector<std::string> builtin_scenario_names();
Scenario make_scenario(const std::string& name, const ScenarioOptions& options = {});
Scenario make_parametric_scenario(const std::string& name, const ParametricQuadratic& params,
                                  const ScenarioOptions& options = {});

// (int_0^1 sqrt(a))^2 and (int_0^1 1/a)^-1 for a(x) = 2 + sin(2 pi x), midpoint rule.
double sqrt_mean_squared_coefficient(std::size_t points = 100000);
double harmonic_mean_coefficient(std::size_t points = 100000);

}  // namespace hjgamma
