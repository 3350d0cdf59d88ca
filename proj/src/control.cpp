#include "hjgamma/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hjgamma/errors.hpp"

namespace hjgamma {

namespace detail {

StepTable::StepTable(const LagrangianModel& lagrangian, const StateGrid& grid, double dt, CostRule rule)
    : nodes(grid.nodes()), samples(lagrangian.velocity_nodes()) {
    const auto vs = lagrangian.velocities();
    index.resize(nodes * samples);
    weight.resize(nodes * samples);
    cost.resize(nodes * samples);
    clamped.resize(nodes * samples);
    for (std::size_t i = 0; i < nodes; ++i) {
        const double x = grid.node(i);
        for (std::size_t j = 0; j < samples; ++j) {
            const std::size_t k = i * samples + j;
            const auto b = grid.bracket(x + vs[j] * dt);
            index[k] = static_cast<std::uint32_t>(b.index);
            weight[k] = b.weight;
            clamped[k] = b.clamped ? 1 : 0;
            const double at = rule == CostRule::Left ? x : grid.clamp(x + 0.5 * vs[j] * dt);
            cost[k] = lagrangian(at, vs[j]);
        }
    }
}

namespace {

inline double lookup(std::span<const double> u, std::uint32_t i, double w) {
    if (w == 0.0) return u[i];
    if (w == 1.0) return u[i + 1];
    return u[i] + w * (u[i + 1] - u[i]);
}

}  // namespace
}  // namespace detail

namespace {

void check_step(const LagrangianModel& lagrangian, const StateGrid& grid, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("time step dt must be positive");
    if (dt * lagrangian.vmax() > grid.upper() - grid.lower()) {
        throw ConfigError("dt * vmax exceeds the domain length (one step overshoots the grid)");
    }
    for (std::size_t i = 0; i < grid.nodes(); ++i) {
        if (!lagrangian.window_adequate(grid.node(i))) {
            throw WindowError("velocity window inadequate at x=" + std::to_string(grid.node(i)) +
                              ": min_v L is attained on the window boundary");
        }
    }
}

}  // namespace

SemigroupOperator::SemigroupOperator(LagrangianModel lagrangian, StateGrid grid, double dt, CostRule rule)
    : lagrangian_(std::move(lagrangian)), grid_(grid), dt_(dt),
      table_((check_step(lagrangian_, grid_, dt), lagrangian_), grid_, dt, rule) {}

SemigroupOperator::Result SemigroupOperator::apply_detail(const GridFunction& f, double t) const {
    if (!(t >= 0.0)) throw ConfigError("semigroup time must be >= 0");
    if (!(f.grid() == grid_)) throw ConfigError("semigroup applied to a function on another grid");
    const auto steps = static_cast<std::size_t>(std::llround(t / dt_));
    Result r{f, steps, static_cast<double>(steps) * dt_, 0.0, 0, 0};
    r.snap = r.snapped_time - t;
    if (steps == 0) return r;

    const std::size_t n = table_.nodes;
    const std::size_t m = table_.samples;
    std::vector<double> cur(f.values().begin(), f.values().end());
    std::vector<double> next(n);
    for (std::size_t s = 0; s < steps; ++s) {
        for (std::size_t i = 0; i < n; ++i) {
            double best = -std::numeric_limits<double>::infinity();
            std::size_t arg = 0;
            const std::size_t base = i * m;
            for (std::size_t j = 0; j < m; ++j) {
                const std::size_t k = base + j;
                const double value =
                    detail::lookup(cur, table_.index[k], table_.weight[k]) - dt_ * table_.cost[k];
                if (value > best) {
                    best = value;
                    arg = j;
                }
            }
            next[i] = best;
            r.clamp_events += table_.clamped[base + arg];
            if (arg == 0 || arg + 1 == m) ++r.saturation_events;
        }
        cur.swap(next);
    }
    r.value = GridFunction(grid_, std::move(cur));
    return r;
}

ResolventOperator::ResolventOperator(LagrangianModel lagrangian, StateGrid grid, double lambda, double dt,
                                     double tolerance, int max_iterations)
    : lagrangian_(std::move(lagrangian)), grid_(grid), lambda_(lambda), dt_(dt), tolerance_(tolerance),
      max_iterations_(max_iterations), beta_(std::exp(-dt / lambda)),
      table_((check_step(lagrangian_, grid_, dt), lagrangian_), grid_, dt, CostRule::Left) {
    if (!(lambda > 0.0)) throw ConfigError("resolvent requires lambda > 0");
    if (!(tolerance > 0.0)) throw ConfigError("resolvent requires a positive fixed-point tolerance");
    if (max_iterations < 1) throw ConfigError("resolvent requires max_iterations >= 1");
}

ResolventOperator::Result ResolventOperator::apply_detail(const GridFunction& h) const {
    if (!(h.grid() == grid_)) throw ConfigError("resolvent applied to a function on another grid");
    const std::size_t n = table_.nodes;
    const std::size_t m = table_.samples;
    // Exact exponential weights for h linear in time along the step:
    // int_0^dt lambda^-1 e^{-s/lambda} h(x + v s) ds ~ w_start h(x) + w_end h(x + v dt).
    const double keep = 1.0 - beta_;
    const double w_end = lambda_ * keep / dt_ - beta_;
    const double w_start = keep - w_end;
    const double running = lambda_ * keep;
    const auto hv = h.values();
    std::vector<double> h_foot(n * m);
    for (std::size_t k = 0; k < n * m; ++k) h_foot[k] = detail::lookup(hv, table_.index[k], table_.weight[k]);

    std::vector<double> cur(hv.begin(), hv.end());
    std::vector<double> next(n);
    std::vector<std::size_t> args(n);
    Result r{h, 0, std::numeric_limits<double>::infinity(), 0.0, 0};
    double previous = std::numeric_limits<double>::infinity();
    while (r.iterations < max_iterations_) {
        double residual = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = -std::numeric_limits<double>::infinity();
            std::size_t arg = 0;
            const std::size_t base = i * m;
            const double source = w_start * hv[i];
            for (std::size_t j = 0; j < m; ++j) {
                const std::size_t k = base + j;
                const double value = source + w_end * h_foot[k] - running * table_.cost[k] +
                                     beta_ * detail::lookup(cur, table_.index[k], table_.weight[k]);
                if (value > best) {
                    best = value;
                    arg = j;
                }
            }
            next[i] = best;
            args[i] = base + arg;
            residual = std::max(residual, std::abs(best - cur[i]));
        }
        cur.swap(next);
        ++r.iterations;
        if (std::isfinite(previous) && previous > 0.0) r.worst_ratio = std::max(r.worst_ratio, residual / previous);
        previous = residual;
        r.residual = residual;
        if (residual <= tolerance_) break;
    }
    if (r.residual > tolerance_) {
        throw ConvergenceError("value iteration did not converge (residual " + std::to_string(r.residual) + ")",
                               r.residual, r.iterations);
    }
    for (std::size_t k : args) r.clamp_events += table_.clamped[k];
    r.value = GridFunction(grid_, std::move(cur));
    return r;
}

ResolventFactory make_resolvent_factory(const LagrangianModel& lagrangian, const StateGrid& grid, double dt,
                                        double tolerance, int max_iterations) {
    return [=](double lambda) { return ResolventOperator(lagrangian, grid, lambda, dt, tolerance, max_iterations); };
}

GridFunction semigroup_apply(const SemigroupOperator& semigroup, const GridFunction& f, double t) {
    return semigroup.apply(f, t);
}

GridFunction resolvent_apply(const ResolventOperator& resolvent, const GridFunction& h) {
    return resolvent.apply(h);
}

double pseudo_resolvent_residual(const ResolventFactory& factory, double alpha, double beta,
                                 const GridFunction& h, const PseudoResolventOptions& options) {
    if (!(alpha > 0.0)) throw ConfigError("pseudo-resolvent check needs alpha > 0");
    if (options.allow_equal ? !(alpha <= beta) : !(alpha < beta)) {
        throw ConfigError("pseudo-resolvent check needs alpha < beta");
    }
    const auto rb = factory(beta).apply(h);
    const auto inner = rb - (rb - h) * (alpha / beta);
    const auto ra = factory(alpha).apply(inner);
    return sup_norm(rb - ra);
}

std::vector<CrandallLiggettPoint> crandall_liggett_compare(const ResolventFactory& factory,
                                                           const SemigroupOperator& semigroup,
                                                           const GridFunction& f, double t,
                                                           std::span<const int> ns) {
    for (std::size_t i = 0; i < ns.size(); ++i) {
        if (ns[i] < 1) throw ConfigError("Crandall-Liggett step counts must be >= 1");
        if (i > 0 && ns[i] <= ns[i - 1]) throw ConfigError("Crandall-Liggett step counts must increase");
    }
    const auto target = semigroup.apply(f, t);
    std::vector<CrandallLiggettPoint> out;
    out.reserve(ns.size());
    for (int n : ns) {
        if (t == 0.0) {
            out.push_back({n, sup_norm(f - target)});
            continue;
        }
        const auto resolvent = factory(t / n);
        GridFunction u = f;
        for (int k = 0; k < n; ++k) u = resolvent.apply(u);
        out.push_back({n, sup_norm(u - target)});
    }
    return out;
}

ContractionReport contraction_check(const Operator& op, const GridFunction& f1, const GridFunction& f2,
                                    double slack) {
    const auto d_in = f1 - f2;
    const auto d_out = op(f1) - op(f2);
    ContractionReport r;
    r.sup_excess = d_out.max() - d_in.max();
    r.inf_deficit = d_in.min() - d_out.min();
    r.violation = std::max({0.0, r.sup_excess, r.inf_deficit});
    r.pass = r.sup_excess <= slack && r.inf_deficit <= slack;
    return r;
}

double order_violation(const Operator& op, const GridFunction& f, const GridFunction& g) {
    return (op(f) - op(g)).max();
}

namespace {

double sup_on(const GridFunction& f, const Interval& k) {
    double m = -std::numeric_limits<double>::infinity();
    const auto& g = f.grid();
    for (std::size_t i = 0; i < g.nodes(); ++i) {
        if (k.contains(g.node(i))) m = std::max(m, f[i]);
    }
    return m;
}

}  // namespace

EquicontinuityReport strict_equicontinuity_probe(std::span<const Operator> operators,
                                                 const CompactFamily& compacts, std::size_t q, double delta,
                                                 std::span<const FunctionPair> pairs) {
    if (!(delta > 0.0)) throw ConfigError("equicontinuity probe needs delta > 0");
    EquicontinuityReport report;
    report.q = q;
    report.delta = delta;
    const auto& kq = compacts.interval(q);

    // Left-hand sides do not depend on the candidate index.
    struct Probe {
        double lhs;
        double global;
        GridFunction diff;
    };
    std::vector<Probe> probes;
    for (const auto& op : operators) {
        for (const auto& pair : pairs) {
            const auto out = op(pair.first) - op(pair.second);
            auto diff = pair.first - pair.second;
            probes.push_back({sup_on(out, kq), diff.max(), std::move(diff)});
        }
    }
    for (std::size_t cand = 0; cand < compacts.index_count(); ++cand) {
        double worst = -std::numeric_limits<double>::infinity();
        for (const auto& p : probes) {
            const double rhs = delta * p.global + sup_on(p.diff, compacts.interval(cand));
            worst = std::max(worst, p.lhs - rhs);
        }
        if (probes.empty()) worst = 0.0;
        report.probed_index = cand;
        report.residual = worst;
        if (worst <= 1e-12) {
            report.q_hat = cand;
            break;
        }
    }
    return report;
}

ResolventLimitReport resolvent_limit_probe(const ResolventFactory& factory, const GridFunction& h,
                                           std::span<const double> lambdas, const CompactFamily& compacts,
                                           const BucOptions& options) {
    ResolventLimitReport r;
    std::vector<GridFunction> seq;
    for (double lambda : lambdas) {
        r.lambdas.push_back(lambda);
        seq.push_back(factory(lambda).apply(h));
    }
    r.buc = buc_lim_check(seq, h, compacts, options);
    return r;
}

}  // namespace hjgamma
