#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "hjgamma/grid.hpp"
#include "hjgamma/legendre.hpp"

namespace hjgamma {

// Where the running cost of one time step is evaluated along the step.
enum class CostRule { Left, Midpoint };

namespace detail {

// One-step lookahead data for every (node, velocity sample) pair.
struct StepTable {
    std::size_t nodes = 0;
    std::size_t samples = 0;
    std::vector<std::uint32_t> index;
    std::vector<double> weight;
    std::vector<double> cost;  // L(x, v) at the rule's evaluation point (not yet scaled)
    std::vector<std::uint8_t> clamped;

    StepTable(const LagrangianModel& lagrangian, const StateGrid& grid, double dt, CostRule rule);
};

}  // namespace detail

/**
 * V(t)f(x) = sup over paths from x of f(gamma(t)) - int_0^t L, by the backward
 * semi-Lagrangian recursion u_{k+1}(x) = max_v [u_k(x + v dt) - dt L(x, v)].
 * Velocities are restricted to the model's sample set; feet outside the grid are clamped.
 */
class SemigroupOperator {
public:
    SemigroupOperator(LagrangianModel lagrangian, StateGrid grid, double dt, CostRule rule = CostRule::Left);

    struct Result {
        GridFunction value;
        std::size_t steps = 0;
        double snapped_time = 0.0;
        double snap = 0.0;  // snapped_time - requested t
        std::size_t clamp_events = 0;
        std::size_t saturation_events = 0;  // argmax on the window boundary
    };

    Result apply_detail(const GridFunction& f, double t) const;
    GridFunction apply(const GridFunction& f, double t) const { return apply_detail(f, t).value; }
    GridFunction operator()(const GridFunction& f, double t) const { return apply(f, t); }

    double dt() const { return dt_; }
    const StateGrid& grid() const { return grid_; }
    const LagrangianModel& lagrangian() const { return lagrangian_; }

private:
    LagrangianModel lagrangian_;
    StateGrid grid_;
    double dt_;
    detail::StepTable table_;
};

/**
 * R(lambda)h as the fixed point of the discounted Bellman map
 *   u(x) = max_v [ w0 h(x) + w1 h(x + v dt) - lambda (1 - beta) L(x, v) + beta u(x + v dt) ],
 * beta = exp(-dt / lambda), w0 + w1 = 1 - beta (exact exponential weights for h varying
 * linearly along the step). Synchronous value iteration started from u = h, so every
 * iterate is exactly contractive and R(lambda)0 = 0 whenever L(x, 0) = 0.
 */
class ResolventOperator {
public:
    ResolventOperator(LagrangianModel lagrangian, StateGrid grid, double lambda, double dt,
                      double tolerance = 1e-8, int max_iterations = 200000);

    struct Result {
        GridFunction value;
        int iterations = 0;
        double residual = 0.0;
        double worst_ratio = 0.0;  // max over iterations of residual_{k+1} / residual_k
        std::size_t clamp_events = 0;
    };

    Result apply_detail(const GridFunction& h) const;
    GridFunction apply(const GridFunction& h) const { return apply_detail(h).value; }
    GridFunction operator()(const GridFunction& h) const { return apply(h); }

    double lambda() const { return lambda_; }
    double contraction_factor() const { return beta_; }
    double tolerance() const { return tolerance_; }

private:
    LagrangianModel lagrangian_;
    StateGrid grid_;
    double lambda_;
    double dt_;
    double tolerance_;
    int max_iterations_;
    double beta_;
    detail::StepTable table_;
};

using Operator = std::function<GridFunction(const GridFunction&)>;
using ResolventFactory = std::function<ResolventOperator(double lambda)>;

ResolventFactory make_resolvent_factory(const LagrangianModel& lagrangian, const StateGrid& grid, double dt,
                                        double tolerance = 1e-8, int max_iterations = 200000);

GridFunction semigroup_apply(const SemigroupOperator& semigroup, const GridFunction& f, double t);
GridFunction resolvent_apply(const ResolventOperator& resolvent, const GridFunction& h);

struct PseudoResolventOptions {
    bool allow_equal = false;
};

// sup-norm of R(beta)h - R(alpha)(R(beta)h - alpha (R(beta)h - h) / beta).
double pseudo_resolvent_residual(const ResolventFactory& factory, double alpha, double beta,
                                 const GridFunction& h, const PseudoResolventOptions& options = {});

struct CrandallLiggettPoint {
    int n = 0;
    double gap = 0.0;
};

// gap(n) = || R(t/n)^n f - V(t) f ||_sup for every n in ns.
std::vector<CrandallLiggettPoint> crandall_liggett_compare(const ResolventFactory& factory,
                                                           const SemigroupOperator& semigroup,
                                                           const GridFunction& f, double t,
                                                           std::span<const int> ns);

struct ContractionReport {
    bool pass = false;
    double sup_excess = 0.0;   // sup(Tf1 - Tf2) - sup(f1 - f2)
    double inf_deficit = 0.0;  // inf(f1 - f2) - inf(Tf1 - Tf2)
    double violation = 0.0;    // max(0, sup_excess, inf_deficit)
};

ContractionReport contraction_check(const Operator& op, const GridFunction& f1, const GridFunction& f2,
                                    double slack = 1e-9);

// max over nodes of (T f - T g) for f <= g; a positive value breaks order preservation.
double order_violation(const Operator& op, const GridFunction& f, const GridFunction& g);

struct FunctionPair {
    GridFunction first;
    GridFunction second;
};

struct EquicontinuityReport {
    std::size_t q = 0;
    double delta = 0.0;
    std::optional<std::size_t> q_hat;  // smallest sufficient index, if any
    std::size_t probed_index = 0;      // q_hat, or the largest index when none suffices
    double residual = 0.0;             // max over pairs and n of lhs - rhs at probed_index
};

EquicontinuityReport strict_equicontinuity_probe(std::span<const Operator> operators,
                                                 const CompactFamily& compacts, std::size_t q, double delta,
                                                 std::span<const FunctionPair> pairs);

struct ResolventLimitReport {
    std::vector<double> lambdas;
    BucReport buc;
};

// R(lambda)h -> h along a decreasing lambda ladder (read as lambda -> 0).
ResolventLimitReport resolvent_limit_probe(const ResolventFactory& factory, const GridFunction& h,
                                           std::span<const double> lambdas, const CompactFamily& compacts,
                                           const BucOptions& options);

}  // namespace hjgamma
