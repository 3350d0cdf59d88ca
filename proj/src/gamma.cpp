#include "hjgamma/gamma.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "hjgamma/errors.hpp"

namespace hjgamma {

void GammaReport::add(GammaRecord record) {
    pass = pass && record.pass;
    records.push_back(std::move(record));
}

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

double tail_min(const std::vector<double>& trace, double frac) {
    const auto s = tail_start(trace.size(), frac);
    return *std::min_element(trace.begin() + static_cast<std::ptrdiff_t>(s), trace.end());
}

double tail_max(const std::vector<double>& trace, double frac) {
    const auto s = tail_start(trace.size(), frac);
    return *std::max_element(trace.begin() + static_cast<std::ptrdiff_t>(s), trace.end());
}

std::vector<double> recovery_ladder(const GammaOptions& o) {
    if (!o.recovery_scales.empty()) return o.recovery_scales;
    std::vector<double> ms;
    for (int m = 1; m <= 64; ++m) ms.push_back(m);
    return ms;
}

// Node-level argmax of f_m - J^n(. | x); ties go to the smallest index.
std::size_t recovery_argmax(const TestFamily& family, double m, const GridFunction& profile) {
    const auto& grid = profile.grid();
    std::size_t best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < grid.nodes(); ++j) {
        const double v = family.value(m, grid.node(j)) - profile[j];
        if (v > best_value) {
            best_value = v;
            best = j;
        }
    }
    return best;
}

}  // namespace

GammaRecord gamma_liminf_marginal(const Scenario& scenario, double t, std::span<const double> xs,
                                  std::span<const double> ys, double x, double y, const GammaOptions& options) {
    GammaRecord r;
    r.check = "liminf_marginal";
    r.ns = scenario.ns();
    r.tolerance = options.tolerance;
    if (xs.size() != scenario.members.size() || ys.size() != scenario.members.size()) {
        throw ConfigError("liminf check needs one (x_n, y_n) per scenario member");
    }
    for (std::size_t i = 0; i < scenario.members.size(); ++i) {
        r.trace.push_back(conditional_rate(scenario.semigroup(i), t, xs[i], ys[i], options.rate));
    }
    r.limit = conditional_rate(scenario.limit_semigroup(), t, x, y, options.rate);
    const bool converged = std::abs(xs.back() - x) <= options.sequence_tolerance &&
                           std::abs(ys.back() - y) <= options.sequence_tolerance;
    const double low = tail_min(r.trace, options.tail_fraction);
    r.pass = converged && low >= r.limit - options.tolerance;
    if (!converged) {
        r.detail = "supplied sequences do not reach (x, y) within " + fmt(options.sequence_tolerance);
    } else if (!r.pass) {
        r.detail = "tail minimum " + fmt(low) + " < limit " + fmt(r.limit) + " - " + fmt(options.tolerance);
    }
    return r;
}

GammaRecord gamma_limsup_marginal(const Scenario& scenario, double t, double x, double y,
                                  const GammaOptions& options) {
    GammaRecord r;
    r.check = "limsup_marginal";
    r.ns = scenario.ns();
    r.tolerance = options.tolerance;
    const auto& grid = scenario.grid;
    const auto limit_v = scenario.limit_semigroup();
    r.limit = conditional_rate(limit_v, t, x, y, options.rate);
    if (r.limit >= kSentinel) throw ConfigError("limsup construction needs a finite target rate");

    const double cap = options.rate.cap;
    const TestFamily family{y, {}, cap, {}};
    const auto ladder = recovery_ladder(options);
    std::map<double, double> dual_cache;
    auto dual_at = [&](double m) {
        auto it = dual_cache.find(m);
        if (it != dual_cache.end()) return it->second;
        const double v = family.value(m, y) - limit_v.apply(family.member(m, grid), t)(x);
        dual_cache.emplace(m, v);
        return v;
    };

    for (std::size_t i = 0; i < scenario.members.size(); ++i) {
        const auto& member = scenario.members[i];
        RecoveryRung rung;
        rung.n = member.n;
        rung.epsilon = 1.0 / (options.epsilon_offset + static_cast<double>(i));
        const double eps = rung.epsilon;
        std::optional<double> fallback;
        for (double m : ladder) {
            if (m < 1.0 / eps || m * m * std::min(eps, cap) < r.limit + 1.0) continue;
            if (!fallback) fallback = m;
            if (std::abs(r.limit - dual_at(m)) <= eps) {
                rung.m = m;
                rung.m_found = true;
                break;
            }
        }
        if (!rung.m_found) rung.m = fallback.value_or(ladder.back());

        const auto profile = rate_profile(member.lagrangian, grid, t, x, options.profile);
        const auto j = recovery_argmax(family, rung.m, profile);
        rung.point = grid.node(j);
        rung.value = profile[j];
        rung.bound = r.limit + 4.0 * eps;
        rung.holds = rung.value <= rung.bound;
        r.trace.push_back(rung.value);
        r.recovery_points.push_back(rung.point);
        r.rungs.push_back(rung);
    }

    const double high = tail_max(r.trace, options.tail_fraction);
    const double distance = std::abs(r.recovery_points.back() - y);
    const bool value_ok = high <= r.limit + options.tolerance;
    const bool points_ok = distance <= options.recovery_spacings * grid.spacing() * (1.0 + 1e-9);
    r.pass = value_ok && points_ok;
    if (!points_ok) {
        const auto& last = r.rungs.back();
        r.detail = "recovery point selection: argmax of f_m - J^n(.|x) at n=" + fmt(last.n) + ", m=" +
                   fmt(last.m) + " is " + fmt(last.point) + ", distance " + fmt(distance) + " from y=" + fmt(y);
    } else if (!value_ok) {
        r.detail = "tail maximum " + fmt(high) + " > limit " + fmt(r.limit) + " + " + fmt(options.tolerance);
    }
    return r;
}

CoercivityDiagnostic equicoercivity_diagnostic(const Scenario& scenario, double bound, std::size_t samples,
                                               const CompactFamily& compacts, const CoercivityOptions& options) {
    if (!(bound >= 0.0)) throw ConfigError("action bound must be >= 0");
    if (options.segments < 1 || !(options.horizon > 0.0)) throw ConfigError("bad coercivity path shape");
    CoercivityDiagnostic d;
    d.bound = bound;
    d.c_l = std::numeric_limits<double>::infinity();
    for (const auto& m : scenario.members) {
        const auto lb = m.lagrangian.quadratic_lower_bound();
        if (!lb) throw ConfigError("equicoercivity diagnostic unavailable: no quadratic lower bound on L_n");
        d.c_l = std::min(d.c_l, lb->c_l);
        d.b_max = std::max(d.b_max, lb->b_max);
    }
    d.modulus_constant = std::sqrt(2.0 * bound / d.c_l);
    const auto& grid = scenario.grid;
    const double horizon = options.horizon;

    // Guaranteed hull: sublevel starts plus drift and Cauchy-Schwarz spread up to the horizon.
    double slo = std::numeric_limits<double>::infinity(), shi = -slo;
    for (const auto& m : scenario.members) {
        for (std::size_t i = 0; i < grid.nodes(); ++i) {
            if (m.initial_cost[i] <= bound) {
                slo = std::min(slo, grid.node(i));
                shi = std::max(shi, grid.node(i));
            }
        }
    }
    if (slo <= shi) {
        const double spread = d.b_max * horizon + std::sqrt(2.0 * bound * horizon / d.c_l);
        // Paths live on the grid, so the hull is cut at its ends.
        d.implied_lo = std::max(grid.lower(), slo - spread);
        d.implied_hi = std::min(grid.upper(), shi + spread);
        d.implied_q = compacts.smallest_containing(d.implied_lo, d.implied_hi);
    } else {
        d.implied_q = 0;
    }

    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    const double h = horizon / static_cast<double>(options.segments);
    for (const auto& member : scenario.members) {
        std::vector<std::size_t> sublevel;
        for (std::size_t i = 0; i < grid.nodes(); ++i) {
            if (member.initial_cost[i] <= bound) sublevel.push_back(i);
        }
        if (sublevel.empty()) continue;
        std::size_t argmin = 0;
        for (std::size_t i = 1; i < grid.nodes(); ++i) {
            if (member.initial_cost[i] < member.initial_cost[argmin]) argmin = i;
        }
        const PathFunctional functional{member.initial_cost, member.lagrangian, horizon};
        const auto vs = member.lagrangian.velocities();
        for (std::size_t k = 0; k < samples; ++k) {
            const std::size_t start =
                k == 0 ? argmin : sublevel[std::min(sublevel.size() - 1,
                                                    static_cast<std::size_t>(unit(rng) * sublevel.size()))];
            const double amplitude = k == 0 ? 0.0 : options.noise * unit(rng);
            std::vector<double> knots(options.segments + 1), states(options.segments + 1);
            states[0] = grid.node(start);
            for (std::size_t s = 0; s < options.segments; ++s) {
                knots[s] = h * static_cast<double>(s);
                double vbest = vs[0], lbest = std::numeric_limits<double>::infinity();
                for (double v : vs) {
                    const double l = member.lagrangian(states[s], v);
                    if (l < lbest) {
                        lbest = l;
                        vbest = v;
                    }
                }
                const double noise = amplitude * normal(rng);
                states[s + 1] = grid.clamp(states[s] + h * (vbest + noise));
            }
            knots.back() = horizon;
            const Path path(knots, states);
            ++d.sampled;
            const double action = path_action(functional, path);
            if (action > bound) continue;
            ++d.accepted;
            for (std::size_t a = 0; a < states.size(); ++a) {
                lo = std::min(lo, states[a]);
                hi = std::max(hi, states[a]);
                for (std::size_t b = a + 1; b < states.size(); ++b) {
                    const double dt = knots[b] - knots[a];
                    const double allowed = d.b_max * dt + std::sqrt(2.0 * bound * dt / d.c_l);
                    const double excess = std::abs(states[b] - states[a]) - allowed;
                    d.worst_excess = std::max(d.worst_excess, excess);
                    if (excess > options.slack) d.modulus_holds = false;
                }
            }
        }
    }
    if (d.accepted > 0) {
        d.sampled_lo = lo;
        d.sampled_hi = hi;
        d.sampled_q = compacts.smallest_containing(lo, hi);
    }
    return d;
}

CompactFamily default_compacts(const StateGrid& grid) {
    const double center = 0.5 * (grid.lower() + grid.upper());
    const double half = 0.5 * (grid.upper() - grid.lower());
    const std::vector<double> radii{half / 8, half / 4, half / 2, 3 * half / 4, half};
    return CompactFamily::nested(grid, center, radii);
}

GridFunction apply_hamiltonian(const HamiltonianModel& hamiltonian, const GridFunction& f) {
    const auto& grid = f.grid();
    const std::size_t n = grid.nodes();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double df;
        if (i == 0) {
            df = (f[1] - f[0]) / (grid.node(1) - grid.node(0));
        } else if (i + 1 == n) {
            df = (f[n - 1] - f[n - 2]) / (grid.node(n - 1) - grid.node(n - 2));
        } else {
            df = (f[i + 1] - f[i - 1]) / (grid.node(i + 1) - grid.node(i - 1));
        }
        out[i] = hamiltonian.at(grid.node(i), df);
    }
    return GridFunction(grid, std::move(out));
}

ExtendedLimitReport extended_limit_check(std::span<const GridFunction> fs, const GridFunction& f,
                                         std::span<const HamiltonianModel> hs, const HamiltonianModel& h,
                                         const CompactFamily& compacts, double tol) {
    if (fs.size() != hs.size()) throw ConfigError("extended limit needs one H_n per f_n");
    BucOptions opts;
    opts.tol = tol;
    ExtendedLimitReport r;
    r.functions = buc_lim_check(fs, f, compacts, opts);
    std::vector<GridFunction> hfs;
    for (std::size_t i = 0; i < fs.size(); ++i) hfs.push_back(apply_hamiltonian(hs[i], fs[i]));
    r.hamiltonians = buc_lim_check(hfs, apply_hamiltonian(h, f), compacts, opts);
    r.pass = r.functions.pass && r.hamiltonians.pass;
    return r;
}

namespace {

GammaRecord failed_record(const std::string& check, const std::exception& e) {
    GammaRecord r;
    r.check = check;
    r.pass = false;
    r.detail = std::string("error: ") + e.what();
    return r;
}

GammaRecord coercivity_record(const Scenario& s, const Path& path, const PathCheckOptions& o,
                              const CompactFamily& compacts) {
    auto copts = o.coercivity;
    copts.horizon = std::max(copts.horizon, path.end_time());
    const auto d = equicoercivity_diagnostic(s, o.coercivity_bound, o.coercivity_samples, compacts, copts);
    GammaRecord r;
    r.check = "equicoercivity";
    r.ns = s.ns();
    r.limit = d.modulus_constant;
    r.tolerance = copts.slack;
    r.trace = {d.worst_excess};
    r.pass = d.modulus_holds && d.implied_q.has_value();
    r.detail = "accepted " + std::to_string(d.accepted) + "/" + std::to_string(d.sampled) + ", implied q=" +
               (d.implied_q ? std::to_string(*d.implied_q) : std::string("none")) + ", sampled q=" +
               (d.sampled_q ? std::to_string(*d.sampled_q) : std::string("none"));
    return r;
}

std::pair<GammaRecord, GammaRecord> initial_cost_records(const Scenario& s, const GammaOptions& o) {
    GammaRecord lo, hi;
    lo.check = "initial_cost_liminf";
    hi.check = "initial_cost_limsup";
    lo.ns = hi.ns = s.ns();
    lo.tolerance = hi.tolerance = o.tolerance;
    const auto& i0 = s.limit_initial_cost;
    for (const auto& m : s.members) {
        double dmin = 0.0, dmax = 0.0;
        for (std::size_t i = 0; i < i0.size(); ++i) {
            if (i0[i] >= kSentinel && m.initial_cost[i] >= kSentinel) continue;
            const double d = m.initial_cost[i] - i0[i];
            dmin = std::min(dmin, d);
            dmax = std::max(dmax, d);
        }
        lo.trace.push_back(dmin);
        hi.trace.push_back(dmax);
    }
    lo.pass = tail_min(lo.trace, o.tail_fraction) >= -o.tolerance;
    hi.pass = tail_max(hi.trace, o.tail_fraction) <= o.tolerance;
    if (!lo.pass) lo.detail = "min over nodes of I0_n - I0 stays below -tolerance";
    if (!hi.pass) hi.detail = "max over nodes of I0_n - I0 stays above tolerance (identity recovery)";
    return {lo, hi};
}

GammaRecord semigroup_record(const Scenario& s, const Path& path, std::span<const std::vector<double>> partitions,
                             const PathCheckOptions& o, const CompactFamily& compacts) {
    GammaRecord r;
    r.check = "semigroup_convergence";
    r.ns = s.ns();
    r.tolerance = o.semigroup_tolerance;
    r.trace.assign(s.members.size(), 0.0);
    r.pass = true;

    std::vector<double> times;
    for (const auto& part : partitions) {
        for (std::size_t i = 1; i < part.size(); ++i) {
            const double dt = part[i] - part[i - 1];
            if (std::none_of(times.begin(), times.end(), [&](double u) { return std::abs(u - dt) < 1e-12; })) {
                times.push_back(dt);
            }
        }
    }
    if (times.empty()) times.push_back(path.end_time());
    std::vector<SemigroupOperator> ops;
    for (std::size_t i = 0; i < s.members.size(); ++i) ops.push_back(s.semigroup(i));
    const auto limit_v = s.limit_semigroup();
    BucOptions bopts;
    bopts.tol = o.semigroup_tolerance;
    bopts.tail_fraction = o.gamma.tail_fraction;
    const auto last_q = compacts.index_count() - 1;
    for (double base : {path.states().front(), path.states().back()}) {
        const TestFamily family{base, {}, o.gamma.rate.cap, {}};
        for (double m : o.semigroup_scales) {
            const auto f = family.member(m, s.grid);
            for (double t : times) {
                std::vector<GridFunction> fs;
                for (const auto& op : ops) fs.push_back(op.apply(f, t));
                const auto buc = buc_lim_check(fs, limit_v.apply(f, t), compacts, bopts);
                for (std::size_t n = 0; n < fs.size(); ++n) {
                    r.trace[n] = std::max(r.trace[n], buc.deviations[last_q][n]);
                }
                if (!buc.pass && r.pass) {
                    r.pass = false;
                    r.detail = "V_n(t) f does not converge to V(t) f at t=" + fmt(t) + ", base " + fmt(base) +
                               ", m=" + fmt(m);
                }
            }
        }
    }
    return r;
}

}  // namespace

GammaReport gamma_path_check(const Scenario& scenario, const Path& path,
                             std::span<const std::vector<double>> partitions, const PathCheckOptions& options) {
    GammaReport report;
    const CompactFamily compacts = options.compacts ? *options.compacts : default_compacts(scenario.grid);
    const auto& go = options.gamma;

    try {
        report.add(coercivity_record(scenario, path, options, compacts));
    } catch (const std::exception& e) {
        report.add(failed_record("equicoercivity", e));
    }
    try {
        auto [lo, hi] = initial_cost_records(scenario, go);
        report.add(std::move(lo));
        report.add(std::move(hi));
    } catch (const std::exception& e) {
        report.add(failed_record("initial_cost", e));
    }
    try {
        report.add(semigroup_record(scenario, path, partitions, options, compacts));
    } catch (const std::exception& e) {
        report.add(failed_record("semigroup_convergence", e));
    }

    const std::size_t count = scenario.members.size();
    const double x0 = path.states().front();
    GammaRecord path_lo, path_hi;
    path_lo.check = "path_liminf";
    path_hi.check = "path_limsup";
    path_lo.ns = path_hi.ns = scenario.ns();
    path_lo.tolerance = path_hi.tolerance = go.tolerance;
    path_lo.trace.assign(count, -std::numeric_limits<double>::infinity());
    path_hi.trace.assign(count, -std::numeric_limits<double>::infinity());
    path_lo.limit = path_hi.limit = -std::numeric_limits<double>::infinity();
    bool marginals_ok = true;

    for (std::size_t p = 0; p < partitions.size(); ++p) {
        const auto& times = partitions[p];
        try {
            if (times.empty() || times.front() != 0.0) throw ConfigError("partitions must start at time 0");
            std::vector<double> lo_sum(count), hi_sum(count);
            for (std::size_t n = 0; n < count; ++n) lo_sum[n] = hi_sum[n] = scenario.members[n].initial_cost(x0);
            double limit_sum = scenario.limit_initial_cost(x0);
            for (std::size_t i = 1; i < times.size(); ++i) {
                const double t = times[i] - times[i - 1];
                const double x = path.at(times[i - 1]), y = path.at(times[i]);
                const std::string where =
                    "[partition " + std::to_string(p) + ", t=" + fmt(times[i - 1]) + ".." + fmt(times[i]) + "]";
                const std::vector<double> xs(count, x), ys(count, y);
                auto lo = gamma_liminf_marginal(scenario, t, xs, ys, x, y, go);
                auto hi = gamma_limsup_marginal(scenario, t, x, y, go);
                lo.check += where;
                hi.check += where;
                for (std::size_t n = 0; n < count; ++n) {
                    lo_sum[n] = saturate(lo_sum[n] + lo.trace[n]);
                    hi_sum[n] = saturate(hi_sum[n] + hi.trace[n]);
                }
                limit_sum = saturate(limit_sum + lo.limit);
                marginals_ok = marginals_ok && lo.pass && hi.pass;
                report.add(std::move(lo));
                report.add(std::move(hi));
            }
            for (std::size_t n = 0; n < count; ++n) {
                path_lo.trace[n] = std::max(path_lo.trace[n], lo_sum[n]);
                path_hi.trace[n] = std::max(path_hi.trace[n], hi_sum[n]);
            }
            path_lo.limit = std::max(path_lo.limit, limit_sum);
        } catch (const std::exception& e) {
            report.add(failed_record("marginals[partition " + std::to_string(p) + "]", e));
            marginals_ok = false;
        }
    }
    path_hi.limit = path_lo.limit;
    if (partitions.empty()) {
        path_lo.detail = path_hi.detail = "no partitions supplied";
    } else if (std::isfinite(path_lo.limit)) {
        path_lo.pass = tail_min(path_lo.trace, go.tail_fraction) >= path_lo.limit - go.tolerance;
        path_hi.pass = tail_max(path_hi.trace, go.tail_fraction) <= path_hi.limit + go.tolerance;
        if (!path_lo.pass) path_lo.detail = "projective liminf trace falls below the limit";
        if (!path_hi.pass) path_hi.detail = "projective limsup trace exceeds the limit";
    }
    if (!marginals_ok) {
        path_lo.pass = path_hi.pass = false;
        path_lo.detail = path_hi.detail = "a marginal check along a partition failed";
    }
    report.add(std::move(path_lo));
    report.add(std::move(path_hi));
    return report;
}

}  // namespace hjgamma
