#include "hjgamma/legendre.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hjgamma/errors.hpp"

namespace hjgamma {

std::vector<double> symmetric_samples(double half_width, std::size_t count) {
    if (!(half_width > 0.0)) throw ConfigError("sample window must be positive");
    if (count < 3) throw ConfigError("at least 3 samples required");
    std::vector<double> out(count);
    const double step = 2.0 * half_width / static_cast<double>(count - 1);
    for (std::size_t j = 0; j < count; ++j) out[j] = -half_width + static_cast<double>(j) * step;
    out.back() = half_width;
    // Odd counts put an exact zero in the middle.
    if (count % 2 == 1) out[count / 2] = 0.0;
    return out;
}

LagrangianModel::LagrangianModel(Kind kind, double vmax, std::size_t velocity_nodes)
    : kind_(std::move(kind)), vmax_(vmax), velocities_(symmetric_samples(vmax, velocity_nodes)) {}

LagrangianModel LagrangianModel::quadratic(CoefficientFn a, CoefficientFn b, double a_min, double b_max,
                                           double vmax, std::size_t velocity_nodes) {
    if (!(a_min > 0.0)) throw ConfigError("quadratic Lagrangian requires a_min > 0");
    if (!(b_max >= 0.0)) throw ConfigError("quadratic Lagrangian requires b_max >= 0");
    if (!a || !b) throw ConfigError("quadratic Lagrangian requires coefficient functions");
    return LagrangianModel(QuadraticKind{std::move(a), std::move(b), a_min, b_max}, vmax, velocity_nodes);
}

LagrangianModel LagrangianModel::constant_quadratic(double a, double b, double vmax,
                                                    std::size_t velocity_nodes) {
    return quadratic([a](double) { return a; }, [b](double) { return b; }, a, std::abs(b), vmax,
                     velocity_nodes);
}

LagrangianModel LagrangianModel::power(double exponent, double vmax, std::size_t velocity_nodes) {
    if (!(exponent >= 1.0)) throw ConfigError("power Lagrangian requires exponent >= 1");
    return LagrangianModel(PowerKind{exponent}, vmax, velocity_nodes);
}

LagrangianModel LagrangianModel::tabulated(const StateGrid& grid, double vmax, std::size_t velocity_nodes,
                                           const std::function<double(double, double)>& fn) {
    const auto vs = symmetric_samples(vmax, velocity_nodes);
    std::vector<double> table(grid.nodes() * vs.size());
    for (std::size_t i = 0; i < grid.nodes(); ++i) {
        for (std::size_t j = 0; j < vs.size(); ++j) {
            const double v = fn(grid.node(i), vs[j]);
            if (std::isnan(v)) throw ConfigError("tabulated Lagrangian produced NaN");
            table[i * vs.size() + j] = saturate(v);
        }
    }
    return LagrangianModel(TabulatedKind{grid, std::move(table)}, vmax, velocity_nodes);
}

LagrangianModel LagrangianModel::with_window(double vmax, std::size_t velocity_nodes) const {
    if (std::holds_alternative<TabulatedKind>(kind_)) {
        throw ConfigError("tabulated Lagrangians are bound to their sampling window");
    }
    return LagrangianModel(kind_, vmax, velocity_nodes);
}

double LagrangianModel::operator()(double x, double v) const {
    if (std::abs(v) > vmax_ * (1.0 + 1e-12)) return kSentinel;
    return std::visit(
        [&](const auto& k) -> double {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, QuadraticKind>) {
                const double d = v - k.b(x);
                return 0.5 * k.a(x) * d * d;
            } else if constexpr (std::is_same_v<K, PowerKind>) {
                return std::pow(std::abs(v), k.exponent) / k.exponent;
            } else {
                const auto bx = k.grid.bracket(x);
                const std::size_t m = velocities_.size();
                const double step = 2.0 * vmax_ / static_cast<double>(m - 1);
                double s = (std::clamp(v, -vmax_, vmax_) + vmax_) / step;
                auto j = static_cast<std::size_t>(std::floor(s));
                if (j >= m - 1) j = m - 2;
                const double wv = std::clamp(s - static_cast<double>(j), 0.0, 1.0);
                auto row = [&](std::size_t i) {
                    const double lo = k.table[i * m + j];
                    const double hi = k.table[i * m + j + 1];
                    if (wv == 0.0) return lo;
                    if (wv == 1.0) return hi;
                    return lo + wv * (hi - lo);
                };
                const double r0 = row(bx.index);
                if (bx.weight == 0.0) return r0;
                const double r1 = row(bx.index + 1);
                if (bx.weight == 1.0) return r1;
                return r0 + bx.weight * (r1 - r0);
            }
        },
        kind_);
}

std::optional<double> LagrangianModel::closed_form_hamiltonian(double x, double p) const {
    if (const auto* q = std::get_if<QuadraticKind>(&kind_)) {
        return q->b(x) * p + p * p / (2.0 * q->a(x));
    }
    return std::nullopt;
}

std::optional<LagrangianModel::QuadraticBound> LagrangianModel::quadratic_lower_bound() const {
    if (const auto* q = std::get_if<QuadraticKind>(&kind_)) return QuadraticBound{q->a_min, q->b_max};
    if (const auto* p = std::get_if<PowerKind>(&kind_); p && p->exponent == 2.0) {
        return QuadraticBound{1.0, 0.0};
    }
    return std::nullopt;
}

bool LagrangianModel::window_adequate(double x) const {
    std::size_t best = 0;
    double best_value = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < velocities_.size(); ++j) {
        const double l = (*this)(x, velocities_[j]);
        if (l < best_value) {
            best_value = l;
            best = j;
        }
    }
    return best != 0 && best + 1 != velocities_.size();
}

LagrangianDiagnostics diagnose(const LagrangianModel& lagrangian, const StateGrid& grid) {
    LagrangianDiagnostics d;
    d.min_value = std::numeric_limits<double>::infinity();
    const auto vs = lagrangian.velocities();
    std::vector<double> row(vs.size());
    for (std::size_t i = 0; i < grid.nodes(); ++i) {
        const double x = grid.node(i);
        double row_min = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < vs.size(); ++j) {
            row[j] = lagrangian(x, vs[j]);
            row_min = std::min(row_min, row[j]);
        }
        d.min_value = std::min(d.min_value, row_min);
        d.max_min_over_v = std::max(d.max_min_over_v, row_min);
        for (std::size_t j = 1; j + 1 < vs.size(); ++j) {
            if (row[j - 1] >= kSentinel || row[j + 1] >= kSentinel) continue;
            const double second = row[j - 1] - 2.0 * row[j] + row[j + 1];
            d.worst_second_difference = std::min(d.worst_second_difference, second);
        }
        if (!lagrangian.window_adequate(x)) d.window_adequate = false;
    }
    d.nonnegative = d.min_value >= 0.0;
    d.convex = d.worst_second_difference >= -1e-9;
    return d;
}

HamiltonianModel::HamiltonianModel(StateGrid grid, std::vector<double> momenta, std::vector<double> table,
                                   HamiltonianProvenance provenance,
                                   std::function<double(double, double)> analytic)
    : grid_(grid), momenta_(std::move(momenta)), table_(std::move(table)), provenance_(provenance),
      analytic_(std::move(analytic)) {
    if (momenta_.size() < 3) throw ConfigError("HamiltonianModel needs at least 3 momenta");
    if (table_.size() != grid_.nodes() * momenta_.size()) {
        throw ConfigError("HamiltonianModel table size mismatch");
    }
    if (provenance_ == HamiltonianProvenance::Analytic && !analytic_) {
        throw ConfigError("analytic HamiltonianModel needs its closed form");
    }
}

double HamiltonianModel::at(double x, double p) const {
    if (analytic_) return analytic_(x, p);
    const double pmax = momenta_.back();
    if (std::abs(p) > pmax * (1.0 + 1e-12)) {
        throw WindowError("momentum " + std::to_string(p) + " outside the tabulated window");
    }
    const std::size_t m = momenta_.size();
    const double step = 2.0 * pmax / static_cast<double>(m - 1);
    const double s = (std::clamp(p, -pmax, pmax) + pmax) / step;
    auto j = static_cast<std::size_t>(std::floor(s));
    if (j >= m - 1) j = m - 2;
    const double wp = std::clamp(s - static_cast<double>(j), 0.0, 1.0);
    const auto bx = grid_.bracket(x);
    auto row = [&](std::size_t i) {
        const double lo = table_[i * m + j];
        const double hi = table_[i * m + j + 1];
        return lo + wp * (hi - lo);
    };
    const double r0 = row(bx.index);
    if (bx.weight == 0.0) return r0;
    return r0 + bx.weight * (row(bx.index + 1) - r0);
}

ConjugatePoint legendre_transform_detail(const LagrangianModel& lagrangian, double x, double p) {
    const auto vs = lagrangian.velocities();
    double best = -std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t j = 0; j < vs.size(); ++j) {
        const double value = p * vs[j] - lagrangian(x, vs[j]);
        if (value > best) {
            best = value;
            arg = j;
        }
    }
    return {best, arg};
}

double legendre_transform(const LagrangianModel& lagrangian, double x, double p) {
    const auto point = legendre_transform_detail(lagrangian, x, p);
    if (point.argmax == 0 || point.argmax + 1 == lagrangian.velocity_nodes()) {
        throw WindowError("conjugate maximiser on the velocity window boundary at x=" + std::to_string(x) +
                          ", p=" + std::to_string(p));
    }
    return point.value;
}

HamiltonianModel hamiltonian_of(const LagrangianModel& lagrangian, const StateGrid& grid,
                                double momentum_window, std::size_t momentum_samples) {
    auto ps = symmetric_samples(momentum_window, momentum_samples);
    std::vector<double> table(grid.nodes() * ps.size());
    for (std::size_t i = 0; i < grid.nodes(); ++i) {
        for (std::size_t j = 0; j < ps.size(); ++j) {
            table[i * ps.size() + j] = legendre_transform(lagrangian, grid.node(i), ps[j]);
        }
    }
    return HamiltonianModel(grid, std::move(ps), std::move(table), HamiltonianProvenance::Conjugated);
}

HamiltonianModel analytic_hamiltonian(const LagrangianModel& lagrangian, const StateGrid& grid,
                                      double momentum_window, std::size_t momentum_samples) {
    if (!lagrangian.is_quadratic()) throw ConfigError("closed-form conjugate needs a quadratic Lagrangian");
    auto ps = symmetric_samples(momentum_window, momentum_samples);
    std::vector<double> table(grid.nodes() * ps.size());
    for (std::size_t i = 0; i < grid.nodes(); ++i) {
        for (std::size_t j = 0; j < ps.size(); ++j) {
            table[i * ps.size() + j] = *lagrangian.closed_form_hamiltonian(grid.node(i), ps[j]);
        }
    }
    // Copy the model so the closure owns its coefficients.
    auto closed = [model = lagrangian](double x, double p) { return *model.closed_form_hamiltonian(x, p); };
    return HamiltonianModel(grid, std::move(ps), std::move(table), HamiltonianProvenance::Analytic,
                            std::move(closed));
}

BiconjugateReport biconjugate_check(const LagrangianModel& lagrangian, const StateGrid& grid,
                                    const BiconjugateOptions& options) {
    BiconjugateReport report;
    const double pwin = options.momentum_window.value_or(lagrangian.vmax() / 2.0);
    const double vwin = options.check_window.value_or(lagrangian.vmax() / 2.0);
    const auto ps = symmetric_samples(pwin, options.momentum_samples.value_or(lagrangian.velocity_nodes()));
    const auto vs = lagrangian.velocities();

    report.convex = diagnose(lagrangian, grid).convex;

    std::vector<double> h(ps.size());
    std::vector<bool> defined(ps.size());
    for (std::size_t i = 0; i < grid.nodes(); ++i) {
        const double x = grid.node(i);
        std::size_t skipped = 0;
        for (std::size_t k = 0; k < ps.size(); ++k) {
            const auto point = legendre_transform_detail(lagrangian, x, ps[k]);
            defined[k] = point.argmax != 0 && point.argmax + 1 != vs.size();
            h[k] = point.value;
            if (!defined[k]) ++skipped;
        }
        report.skipped_momenta = std::max(report.skipped_momenta, skipped);
        // Does H stay finite one step past each edge? Then the window truncates dom H there.
        const double step = ps.size() > 1 ? ps[1] - ps[0] : 1.0;
        const auto interior = [&](double p) {
            const auto point = legendre_transform_detail(lagrangian, x, p);
            return point.argmax != 0 && point.argmax + 1 != vs.size();
        };
        const bool cut_lo = interior(ps.front() - step);
        const bool cut_hi = interior(ps.back() + step);
        for (double v : vs) {
            if (std::abs(v) > vwin * (1.0 + 1e-12)) continue;
            double bi = -std::numeric_limits<double>::infinity();
            std::size_t arg = 0;
            for (std::size_t k = 0; k < ps.size(); ++k) {
                if (defined[k] && ps[k] * v - h[k] > bi) {
                    bi = ps[k] * v - h[k];
                    arg = k;
                }
            }
            // Sup on the momentum-window edge: the truncated biconjugate only bounds L from below.
            if ((arg == 0 && cut_lo) || (arg + 1 == ps.size() && cut_hi)) {
                ++report.skipped_velocities;
                continue;
            }
            const double gap = std::abs(lagrangian(x, v) - bi);
            if (gap > report.max_gap) {
                report.max_gap = gap;
                report.gap_state = x;
                report.gap_velocity = v;
            }
        }
    }
    report.expected_failure = !report.convex;
    report.pass = report.convex && report.max_gap <= options.tol;
    return report;
}

}  // namespace hjgamma
