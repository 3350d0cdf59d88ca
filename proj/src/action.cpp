#include "hjgamma/action.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <variant>

#include "hjgamma/errors.hpp"

namespace hjgamma {

Path::Path(std::vector<double> knots, std::vector<double> states)
    : knots_(std::move(knots)), states_(std::move(states)) {
    if (knots_.size() < 2) throw ConfigError("Path needs at least 2 knots");
    if (knots_.size() != states_.size()) throw ConfigError("Path knots and states differ in length");
    if (knots_.front() != 0.0) throw ConfigError("Path must start at time 0");
    for (std::size_t i = 1; i < knots_.size(); ++i) {
        if (!(knots_[i] > knots_[i - 1])) throw ConfigError("Path knots must be strictly increasing");
    }
    for (double s : states_) {
        if (!std::isfinite(s)) throw ConfigError("Path states must be finite");
    }
}

Path Path::straight(double start, double end, double horizon, std::size_t segments) {
    if (segments < 1) throw ConfigError("straight path needs at least one segment");
    std::vector<double> ks(segments + 1), xs(segments + 1);
    for (std::size_t i = 0; i <= segments; ++i) {
        const double s = static_cast<double>(i) / static_cast<double>(segments);
        ks[i] = horizon * s;
        xs[i] = start + (end - start) * s;
    }
    ks.back() = horizon;
    xs.back() = end;
    return Path(std::move(ks), std::move(xs));
}

double Path::at(double t) const {
    if (t <= knots_.front()) return states_.front();
    if (t >= knots_.back()) return states_.back();
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    const auto i = static_cast<std::size_t>(it - knots_.begin()) - 1;
    const double w = (t - knots_[i]) / (knots_[i + 1] - knots_[i]);
    return states_[i] + w * (states_[i + 1] - states_[i]);
}

double Path::velocity(std::size_t segment) const {
    return (states_.at(segment + 1) - states_.at(segment)) / (knots_.at(segment + 1) - knots_.at(segment));
}

void Path::require_within(const StateGrid& grid) const {
    for (double s : states_) {
        if (!grid.contains(s)) throw ConfigError("Path state " + std::to_string(s) + " leaves the grid");
    }
}

double path_action(const PathFunctional& functional, const Path& path) {
    if (path.end_time() > functional.horizon * (1.0 + 1e-12)) {
        throw ConfigError("path knots extend beyond the functional's horizon");
    }
    if (functional.subdivisions < 1) throw ConfigError("quadrature needs at least one subdivision");
    path.require_within(functional.initial_cost.grid());

    double total = functional.initial_cost(path.states().front());
    if (total >= kSentinel) return kSentinel;
    const auto& lag = functional.lagrangian;
    const int q = functional.subdivisions;
    for (std::size_t s = 0; s < path.segments(); ++s) {
        const double t0 = path.knots()[s];
        const double dt = path.knots()[s + 1] - t0;
        const double x0 = path.states()[s];
        const double v = path.velocity(s);
        const double h = dt / q;
        double seg = 0.0;
        if (functional.quadrature == Quadrature::Midpoint) {
            for (int k = 0; k < q; ++k) seg += lag(x0 + v * h * (k + 0.5), v);
        } else {
            seg = 0.5 * (lag(x0, v) + lag(x0 + v * dt, v));
            for (int k = 1; k < q; ++k) seg += lag(x0 + v * h * k, v);
        }
        total += h * seg;
        if (total >= kSentinel) return kSentinel;
    }
    return total;
}

namespace {

// Cost of straight segments a -> b over a fixed duration.
class SegmentCost {
public:
    SegmentCost(const LagrangianModel& lagrangian, const StateGrid& grid, double dt, int quadrature_points)
        : lagrangian_(lagrangian), dt_(dt), q_(quadrature_points), lower_(grid.lower()) {
        const auto* quad = std::get_if<QuadraticKind>(&lagrangian.kind());
        if (quad == nullptr) return;
        quadratic_ = quad;
        const std::size_t cells = 16 * (grid.nodes() - 1);
        cell_ = (grid.upper() - grid.lower()) / static_cast<double>(cells);
        for (auto* p : {&pa_, &pab_, &pabb_}) p->assign(cells + 1, 0.0);
        for (std::size_t k = 0; k < cells; ++k) {
            const double x = lower_ + (k + 0.5) * cell_;
            const double a = quad->a(x), b = quad->b(x);
            pa_[k + 1] = pa_[k] + cell_ * a;
            pab_[k + 1] = pab_[k] + cell_ * a * b;
            pabb_[k + 1] = pabb_[k] + cell_ * 0.5 * a * b * b;
        }
    }

    double operator()(double a, double b) const {
        const double v = (b - a) / dt_;
        if (std::abs(v) > lagrangian_.vmax() * (1.0 + 1e-12)) return kSentinel;
        if (quadratic_ == nullptr) {
            double sum = 0.0;
            for (int k = 0; k < q_; ++k) sum += lagrangian_(a + (b - a) * (k + 0.5) / q_, v);
            return saturate(dt_ * sum / q_);
        }
        double ma, mab, mabb;
        const double lo = std::min(a, b), hi = std::max(a, b);
        if (hi - lo < 1e-3 * cell_) {
            const double ax = quadratic_->a(a), bx = quadratic_->b(a);
            ma = ax;
            mab = ax * bx;
            mabb = 0.5 * ax * bx * bx;
        } else {
            const double w = 1.0 / (hi - lo);
            ma = (prefix(pa_, hi) - prefix(pa_, lo)) * w;
            mab = (prefix(pab_, hi) - prefix(pab_, lo)) * w;
            mabb = (prefix(pabb_, hi) - prefix(pabb_, lo)) * w;
        }
        return saturate(dt_ * (0.5 * v * v * ma - v * mab + mabb));
    }

private:
    double prefix(const std::vector<double>& p, double x) const {
        const double s = std::clamp((x - lower_) / cell_, 0.0, static_cast<double>(p.size() - 1));
        const auto k = std::min(static_cast<std::size_t>(s), p.size() - 2);
        return p[k] + (s - k) * (p[k + 1] - p[k]);
    }

    const LagrangianModel& lagrangian_;
    double dt_;
    int q_;
    double lower_;
    const QuadraticKind* quadratic_ = nullptr;
    double cell_ = 0.0;
    std::vector<double> pa_, pab_, pabb_;
};

// Forward DP over knot layers: best cost of reaching each node at the last interior knot.
std::vector<double> interior_layers(const SegmentCost& cost, const StateGrid& grid, double x,
                                    std::size_t interior_knots) {
    const std::size_t n = grid.nodes();
    std::vector<double> cur(n), next(n);
    for (std::size_t i = 0; i < n; ++i) cur[i] = cost(x, grid.node(i));
    for (std::size_t layer = 1; layer < interior_knots; ++layer) {
        for (std::size_t j = 0; j < n; ++j) {
            double best = kSentinel;
            const double zj = grid.node(j);
            for (std::size_t i = 0; i < n; ++i) {
                if (cur[i] >= best) continue;
                best = std::min(best, cur[i] + cost(grid.node(i), zj));
            }
            next[j] = saturate(best);
        }
        cur.swap(next);
    }
    return cur;
}

double finish(const SegmentCost& cost, const StateGrid& grid, const std::vector<double>& last, double y) {
    double best = kSentinel;
    for (std::size_t i = 0; i < grid.nodes(); ++i) {
        if (last[i] >= best) continue;
        best = std::min(best, last[i] + cost(grid.node(i), y));
    }
    return saturate(best);
}

void check_rate_inputs(const StateGrid& grid, double t, double x, const PrimalRateOptions& options) {
    if (!(t > 0.0)) throw ConfigError("conditional rate needs t > 0");
    if (!grid.contains(x)) throw ConfigError("rate start point lies outside the grid");
    if (options.quadrature_points < 1) throw ConfigError("quadrature needs at least one point");
}

}  // namespace

double conditional_rate_primal(const LagrangianModel& lagrangian, const StateGrid& grid, double t, double x,
                               double y, const PrimalRateOptions& options) {
    check_rate_inputs(grid, t, x, options);
    if (!grid.contains(y)) throw ConfigError("rate end point lies outside the grid");
    const double dt = t / static_cast<double>(options.interior_knots + 1);
    const SegmentCost cost(lagrangian, grid, dt, options.quadrature_points);
    if (options.interior_knots == 0) return cost(x, y);
    return finish(cost, grid, interior_layers(cost, grid, x, options.interior_knots), y);
}

GridFunction rate_profile(const LagrangianModel& lagrangian, const StateGrid& grid, double t, double x,
                          const PrimalRateOptions& options) {
    check_rate_inputs(grid, t, x, options);
    const double dt = t / static_cast<double>(options.interior_knots + 1);
    const SegmentCost cost(lagrangian, grid, dt, options.quadrature_points);
    std::vector<double> out(grid.nodes());
    if (options.interior_knots == 0) {
        for (std::size_t j = 0; j < grid.nodes(); ++j) out[j] = cost(x, grid.node(j));
    } else {
        const auto last = interior_layers(cost, grid, x, options.interior_knots);
        for (std::size_t j = 0; j < grid.nodes(); ++j) out[j] = finish(cost, grid, last, grid.node(j));
    }
    return GridFunction(grid, std::move(out));
}

GridFunction TestFamily::member(double m, const StateGrid& grid) const {
    return GridFunction::sample(grid, [&](double z) { return value(m, z); });
}

double TestFamily::value(double m, double z) const { return -m * m * std::min(std::abs(z - base), cap); }

IsolationCheck check_isolating(const TestFamily& family, double m, const StateGrid& grid) {
    IsolationCheck c;
    c.near_zero_at_base = std::abs(family.value(m, family.base)) <= 1.0 / m;
    for (std::size_t i = 0; i < grid.nodes(); ++i) {
        const double z = grid.node(i);
        const double f = family.value(m, z);
        if (f > 0.0) c.nonpositive = false;
        if (std::abs(z - family.base) >= 1.0 / m && f > -m) c.isolates = false;
    }
    return c;
}

DualRate conditional_rate_dual(const SemigroupOperator& semigroup, double t, double x, double y,
                               const TestFamily& family) {
    if (std::abs(family.base - y) > 1e-12) throw ConfigError("test family is not based at the end point");
    const auto& grid = semigroup.grid();
    if (!grid.contains(x) || !grid.contains(y)) throw ConfigError("rate end points must lie in the grid");
    DualRate out;
    out.value = -std::numeric_limits<double>::infinity();
    auto consider = [&](const GridFunction& f) {
        const double v = f(y) - semigroup.apply(f, t)(x);
        out.per_member.push_back(v);
        if (v > out.value) {
            out.value = v;
            out.best = out.per_member.size() - 1;
        }
    };
    for (double m : family.scales) consider(family.member(m, grid));
    for (const auto& f : family.dictionary) consider(f);
    if (out.per_member.empty()) throw ConfigError("dual rate needs a non-empty test family");
    return out;
}

double conditional_rate(const SemigroupOperator& semigroup, double t, double x, double y,
                        const RateOptions& options) {
    if (options.mode == RateMode::Primal) {
        return conditional_rate_primal(semigroup.lagrangian(), semigroup.grid(), t, x, y, options.primal);
    }
    TestFamily family{y, options.scales, options.cap, {}};
    return conditional_rate_dual(semigroup, t, x, y, family).value;
}

double finite_dim_value(const GridFunction& initial_cost, const SemigroupOperator& semigroup,
                        std::span<const double> times, std::span<const double> points,
                        const RateOptions& options) {
    if (times.empty() || times.size() != points.size()) {
        throw ConfigError("finite-dimensional value needs matching, non-empty times and points");
    }
    if (times.front() != 0.0) throw ConfigError("finite-dimensional times must start at 0");
    double total = initial_cost(points.front());
    if (total >= kSentinel) return kSentinel;
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (!(times[i] > times[i - 1])) throw ConfigError("finite-dimensional times must increase");
        total += conditional_rate(semigroup, times[i] - times[i - 1], points[i - 1], points[i], options);
        if (total >= kSentinel) return kSentinel;
    }
    return total;
}

ProjectiveValue projective_supremum(const GridFunction& initial_cost, const SemigroupOperator& semigroup,
                                    const Path& path, std::span<const std::vector<double>> partitions,
                                    const RateOptions& options) {
    if (partitions.empty()) throw ConfigError("projective supremum needs at least one partition");
    ProjectiveValue out;
    out.value = -std::numeric_limits<double>::infinity();
    for (const auto& times : partitions) {
        if (!times.empty() && times.back() > path.end_time() * (1.0 + 1e-12)) {
            throw ConfigError("partition extends beyond the path");
        }
        std::vector<double> points;
        points.reserve(times.size());
        for (double t : times) points.push_back(path.at(t));
        const double v = finite_dim_value(initial_cost, semigroup, times, points, options);
        out.per_partition.push_back(v);
        out.value = std::max(out.value, v);
    }
    return out;
}

double dual_functional_lambda(const GridFunction& rate, const GridFunction& f) {
    if (!(rate.grid() == f.grid())) throw ConfigError("Lambda needs J and f on the same grid");
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < f.size(); ++i) best = std::max(best, f[i] - rate[i]);
    return best;
}

IsolatingRecovery isolating_family_recover(const GridFunction& rate, double y, std::span<const double> scales,
                                           double cap) {
    if (scales.empty()) throw ConfigError("isolating recovery needs at least one scale");
    IsolatingRecovery out;
    const auto& grid = rate.grid();
    TestFamily family{y, {}, cap, {}};
    for (double m : scales) {
        out.scales.push_back(m);
        out.values.push_back(-dual_functional_lambda(rate, family.member(m, grid)));
    }
    out.estimate = out.values.back();
    out.extrapolated = out.estimate;
    if (out.values.size() >= 2) {
        const std::size_t k = out.values.size() - 1;
        const double m1 = scales[k - 1], m2 = scales[k];
        out.extrapolated = (m2 * out.values[k] - m1 * out.values[k - 1]) / (m2 - m1);
    }
    out.finite_target = rate(y) < kSentinel;
    if (!out.finite_target) {
        // sup f_m = 0 for this family, so the infinite case forces -Lambda(f_m) >= m.
        bool increasing = true;
        for (std::size_t k = 1; k < out.values.size(); ++k) {
            if (!(out.values[k] > out.values[k - 1])) increasing = false;
        }
        out.diverges = increasing && out.values.back() >= scales.back();
    }
    return out;
}

}  // namespace hjgamma
