#include "runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <limits>
#include <numbers>
#include <random>

#include "hjgamma/action.hpp"
#include "hjgamma/control.hpp"
#include "hjgamma/errors.hpp"
#include "hjgamma/gamma.hpp"
#include "hjgamma/legendre.hpp"
#include "hjgamma/viscosity.hpp"

namespace hjgamma::cli {

namespace {

struct Counters {
    std::size_t clamp_events = 0;
    std::size_t saturation_events = 0;
    std::size_t snap_events = 0;

    GridFunction track(const SemigroupOperator::Result& r) {
        clamp_events += r.clamp_events;
        saturation_events += r.saturation_events;
        if (r.snap != 0.0) ++snap_events;
        return r.value;
    }
};

struct Context {
    const RunConfig& config;
    Scenario scenario;
    SemigroupOperator semigroup;
    ResolventFactory resolvents;
    std::mt19937_64 rng;
    Counters counters;

    const StateGrid& grid() const { return scenario.grid; }
    const LagrangianModel& lagrangian() const { return scenario.limit_lagrangian; }
};

GridFunction random_function(const StateGrid& grid, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> coef(-1.0, 1.0), freq(0.5, 3.0), phase(0.0, 2.0 * std::numbers::pi);
    const double c0 = coef(rng), c1 = coef(rng), c2 = coef(rng), k = freq(rng), ph = phase(rng);
    return GridFunction::sample(grid, [=](double x) { return c0 + c1 * x + c2 * std::sin(k * x + ph); });
}

GridFunction bump(const StateGrid& grid, double center) {
    return GridFunction::sample(grid, [center](double x) { return -0.5 * (x - center) * (x - center); });
}

HamiltonianModel hamiltonian_for(const LagrangianModel& lag, const StateGrid& grid, const RunConfig& c) {
    const double window = c.legendre.momentum_window.value_or(lag.vmax() / 2.0);
    const std::size_t samples = c.legendre.momentum_samples.value_or(lag.velocity_nodes());
    if (lag.closed_form_hamiltonian(0.0, 0.0)) return analytic_hamiltonian(lag, grid, window, samples);
    return hamiltonian_of(lag, grid, window, samples);
}

Json check_legendre(Context& ctx, double tol) {
    const auto& lag = ctx.lagrangian();
    const double window = ctx.config.legendre.momentum_window.value_or(lag.vmax() / 2.0);
    const std::size_t samples = ctx.config.legendre.momentum_samples.value_or(lag.velocity_nodes());
    const auto h = hamiltonian_of(lag, ctx.grid(), window, samples);
    double gap = 0.0;
    bool closed = false;
    for (std::size_t i = 0; i < ctx.grid().nodes(); ++i) {
        for (std::size_t j = 0; j < h.momenta().size(); ++j) {
            if (auto exact = lag.closed_form_hamiltonian(ctx.grid().node(i), h.momenta()[j])) {
                closed = true;
                gap = std::max(gap, std::abs(h.table(i, j) - *exact));
            }
        }
    }
    const auto bi = biconjugate_check(lag, ctx.grid());
    Json j{{"closed_form_available", closed}, {"max_conjugate_gap", gap}, {"biconjugate_gap", bi.max_gap},
           {"biconjugate_pass", bi.pass}, {"convex", bi.convex}, {"skipped_momenta", bi.skipped_momenta},
           {"skipped_velocities", bi.skipped_velocities}};
    j["pass"] = closed ? gap <= tol : bi.pass;
    return j;
}

Json check_semigroup_law(Context& ctx, double tol) {
    const double t = ctx.config.horizon;
    const auto f = bump(ctx.grid(), ctx.config.gamma.path_start);
    const auto half = ctx.counters.track(ctx.semigroup.apply_detail(f, t / 2));
    const auto twice = ctx.counters.track(ctx.semigroup.apply_detail(half, t / 2));
    const auto once = ctx.counters.track(ctx.semigroup.apply_detail(f, t));
    const double residual = sup_norm(twice - once);
    return {{"time", t}, {"residual", residual}, {"pass", residual <= tol}};
}

Json check_pseudo_resolvent(Context& ctx, double tol) {
    const auto h = GridFunction::sample(ctx.grid(), [](double x) { return x; });
    const auto& k = ctx.config.resolvent;
    const double residual = pseudo_resolvent_residual(ctx.resolvents, k.alpha, k.beta, h);
    return {{"alpha", k.alpha}, {"beta", k.beta}, {"residual", residual}, {"pass", residual <= tol}};
}

Json check_crandall_liggett(Context& ctx, double tol) {
    const auto f = bump(ctx.grid(), ctx.config.gamma.path_start);
    const auto& ns = ctx.config.probes.crandall_liggett_ns;
    const auto points = crandall_liggett_compare(ctx.resolvents, ctx.semigroup, f, ctx.config.horizon, ns);
    Json curve = Json::array();
    bool monotone = true;
    for (std::size_t i = 0; i < points.size(); ++i) {
        curve.push_back({{"n", points[i].n}, {"gap", points[i].gap}});
        if (i > 0 && points[i].gap > points[i - 1].gap + tol) monotone = false;
    }
    const bool halved = points.back().gap < points.front().gap / 2.0;
    return {{"time", ctx.config.horizon}, {"monotone", monotone}, {"halved", halved},
            {"curve", curve}, {"pass", monotone && halved}};
}

Json check_contraction(Context& ctx, double tol) {
    const auto& k = ctx.config;
    const auto resolvent = ctx.resolvents(k.resolvent.lambda);
    const Operator v = [&](const GridFunction& f) { return ctx.semigroup.apply(f, k.horizon); };
    const Operator r = [&](const GridFunction& f) { return resolvent.apply(f); };
    double worst = 0.0, worst_order = 0.0;
    std::size_t failures = 0;
    std::uniform_real_distribution<double> shift(0.0, 1.0);
    for (std::size_t i = 0; i < k.probes.contraction_pairs; ++i) {
        const auto f1 = random_function(ctx.grid(), ctx.rng);
        const auto f2 = random_function(ctx.grid(), ctx.rng);
        const double s = shift(ctx.rng);
        const auto g = f1 + GridFunction::sample(ctx.grid(), [s](double x) { return s * (1.0 + std::sin(3.0 * x)); });
        for (const auto* op : {&v, &r}) {
            const auto c = contraction_check(*op, f1, f2, tol);
            worst = std::max(worst, c.violation);
            const double ov = order_violation(*op, f1, g);
            worst_order = std::max(worst_order, ov);
            if (!c.pass || ov > k.probes.order_slack) ++failures;
        }
    }
    return {{"pairs", k.probes.contraction_pairs}, {"worst_violation", worst}, {"worst_order_violation", worst_order},
            {"failures", failures}, {"pass", failures == 0}};
}

Json viscosity_json(const ViscosityReport& r) {
    return {{"pass", r.pass},
            {"worst", r.worst},
            {"location", r.location},
            {"worst_member", r.worst_member},
            {"family_size", r.family_size},
            {"tested", r.tested},
            {"boundary_excluded", r.boundary_excluded},
            {"window_skipped", r.window_skipped}};
}

Json check_viscosity(Context& ctx, double tol) {
    const auto& k = ctx.config;
    const auto h = GridFunction::sample(ctx.grid(), [](double x) { return x; });
    const auto u = ctx.resolvents(k.resolvent.lambda).apply(h);
    const auto ham = hamiltonian_for(ctx.lagrangian(), ctx.grid(), k);
    const auto family = TestFunctionFamily::quadratic(ctx.grid(), k.viscosity.c_max, k.viscosity.centers,
                                                      k.viscosity.slopes, k.viscosity.slope_window,
                                                      k.viscosity.curvature_step);
    ViscosityOptions opts;
    opts.tolerance = tol;
    const auto sub = subsolution_residual(u, ham, k.resolvent.lambda, h, family, opts);
    const auto sup = supersolution_residual(u, ham, k.resolvent.lambda, h, family, opts);
    return {{"lambda", k.resolvent.lambda},
            {"subsolution", viscosity_json(sub)},
            {"supersolution", viscosity_json(sup)},
            {"pass", sub.pass && sup.pass}};
}

Json check_comparison(Context& ctx, double tol) {
    const auto& k = ctx.config;
    const auto resolvent = ctx.resolvents(k.resolvent.lambda);
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < k.probes.comparison_pairs; ++i) {
        const auto h1 = random_function(ctx.grid(), ctx.rng);
        const auto h2 = random_function(ctx.grid(), ctx.rng);
        worst = std::min(worst, comparison_probe(resolvent.apply(h1), resolvent.apply(h2), h1, h2));
    }
    if (k.probes.comparison_pairs == 0) worst = 0.0;
    return {{"pairs", k.probes.comparison_pairs}, {"worst_margin", worst}, {"pass", worst >= -tol}};
}

Json check_duality_gap(Context& ctx, double tol) {
    const auto& k = ctx.config;
    const double x = k.gamma.path_start, y = k.gamma.path_end, t = k.horizon;
    PrimalRateOptions popts{k.rates.interior_knots, k.rates.quadrature_points};
    const double primal = conditional_rate_primal(ctx.lagrangian(), ctx.grid(), t, x, y, popts);
    Json curve = Json::array();
    TestFamily family{y, {}, k.rates.cap, {}};
    double best = -std::numeric_limits<double>::infinity();
    bool weak = true;
    for (double m : k.rates.scales) {
        family.scales = {m};
        best = std::max(best, conditional_rate_dual(ctx.semigroup, t, x, y, family).value);
        const double gap = primal - best;
        if (gap < -tol) weak = false;
        curve.push_back({{"m", m}, {"primal", primal}, {"dual", best}, {"gap", gap}});
    }
    const double final_gap = primal - best;
    return {{"t", t},      {"x", x},          {"y", y},
            {"curve", curve}, {"weak_duality", weak}, {"pass", weak && std::abs(final_gap) <= tol}};
}

Json record_json(const GammaRecord& r) {
    Json j{{"check", r.check}, {"pass", r.pass},   {"limit", r.limit},
           {"tolerance", r.tolerance}, {"ns", r.ns}, {"trace", r.trace}};
    if (!r.detail.empty()) j["detail"] = r.detail;
    if (!r.recovery_points.empty()) j["recovery_points"] = r.recovery_points;
    if (!r.rungs.empty()) {
        Json rungs = Json::array();
        for (const auto& g : r.rungs) {
            rungs.push_back({{"n", g.n}, {"epsilon", g.epsilon}, {"m", g.m}, {"m_found", g.m_found},
                             {"point", g.point}, {"value", g.value}, {"bound", g.bound}, {"holds", g.holds}});
        }
        j["rungs"] = rungs;
    }
    return j;
}

std::vector<std::vector<double>> dyadic_partitions(double horizon, std::size_t depth) {
    std::vector<std::vector<double>> out;
    for (std::size_t d = 0; d <= depth; ++d) {
        const std::size_t cells = std::size_t{1} << d;
        std::vector<double> times;
        for (std::size_t i = 0; i <= cells; ++i) times.push_back(horizon * static_cast<double>(i) / cells);
        out.push_back(times);
    }
    return out;
}

GammaOptions gamma_options(const RunConfig& k, double tol) {
    GammaOptions g;
    g.tolerance = tol;
    g.tail_fraction = k.gamma.tail_fraction;
    g.rate.mode = k.rates.mode == "primal" ? RateMode::Primal : RateMode::Dual;
    g.rate.scales = k.rates.scales;
    g.rate.cap = k.rates.cap;
    g.rate.primal = {k.rates.interior_knots, k.rates.quadrature_points};
    g.profile = g.rate.primal;
    g.epsilon_offset = k.gamma.epsilon_offset;
    g.recovery_spacings = k.gamma.recovery_spacings;
    return g;
}

Json check_gamma_path(Context& ctx, double tol) {
    const auto& k = ctx.config;
    PathCheckOptions opts;
    opts.gamma = gamma_options(k, tol);
    opts.coercivity.seed = k.seed;
    opts.coercivity.horizon = k.horizon;
    opts.coercivity_bound = k.gamma.coercivity_bound;
    opts.coercivity_samples = k.gamma.coercivity_samples;
    opts.semigroup_tolerance = k.gamma.semigroup_tolerance;
    const auto path = Path::straight(k.gamma.path_start, k.gamma.path_end, k.horizon);
    const auto partitions = dyadic_partitions(k.horizon, k.gamma.partition_depth);
    const auto report = gamma_path_check(ctx.scenario, path, partitions, opts);
    Json records = Json::array();
    const GammaRecord* headline = nullptr;
    for (const auto& r : report.records) {
        records.push_back(record_json(r));
        if (!headline && r.check.rfind("liminf_marginal", 0) == 0) headline = &r;
    }
    Json j{{"pass", report.pass}, {"records", records}};
    if (headline) {
        j["ns"] = headline->ns;
        j["trace"] = headline->trace;
        j["limit"] = headline->limit;
    }
    return j;
}

Json check_extended_limit(Context& ctx, double tol) {
    const auto& s = ctx.scenario;
    const auto f = GridFunction::sample(s.grid, [](double x) { return x; });
    std::vector<GridFunction> fs;
    std::vector<HamiltonianModel> hs;
    for (const auto& m : s.members) {
        fs.push_back(f);
        hs.push_back(hamiltonian_for(m.lagrangian, s.grid, ctx.config));
    }
    const auto h = hamiltonian_for(s.limit_lagrangian, s.grid, ctx.config);
    const auto r = extended_limit_check(fs, f, hs, h, default_compacts(s.grid), tol);
    const auto last = r.hamiltonians.deviations.back();
    return {{"functions_pass", r.functions.pass}, {"hamiltonians_pass", r.hamiltonians.pass},
            {"hamiltonian_deviation", last}, {"pass", r.pass}};
}

Json config_echo(const RunConfig& c) {
    const auto& o = c.scenario_options;
    Json j;
    j["schema"] = c.schema;
    j["seed"] = c.seed;
    j["grid"] = {{"lower", o.lower}, {"upper", o.upper}, {"nodes", o.nodes}};
    j["velocity_window"] = {{"vmax", o.vmax}, {"samples", o.velocity_samples}};
    j["time"] = {{"dt", o.dt}, {"horizon", c.horizon}};
    Json sc{{"name", c.scenario},
            {"ns", o.ns},
            {"initial_cost", {{"center", o.initial_center}, {"weight", o.initial_weight}, {"radius", o.initial_radius}}}};
    if (c.inline_scenario) {
        const auto& p = *c.inline_scenario;
        sc["inline"] = {{"a0", p.a0}, {"a1", p.a1}, {"frequency", p.frequency}, {"b0", p.b0}, {"b1", p.b1}};
        if (p.limit_a) sc["inline"]["limit_a"] = *p.limit_a;
        if (p.limit_b) sc["inline"]["limit_b"] = *p.limit_b;
    }
    j["scenario"] = sc;
    j["checks"] = c.checks;
    Json tol = Json::object();
    for (const auto& name : c.checks) tol[name] = c.tolerance(name);
    j["tolerances"] = tol;
    j["resolvent"] = {{"lambda", c.resolvent.lambda}, {"tolerance", c.resolvent.tolerance},
                      {"max_iterations", c.resolvent.max_iterations}, {"alpha", c.resolvent.alpha},
                      {"beta", c.resolvent.beta}};
    j["viscosity"] = {{"c_max", c.viscosity.c_max}, {"centers", c.viscosity.centers},
                      {"slopes", c.viscosity.slopes}, {"slope_window", c.viscosity.slope_window},
                      {"curvature_step", c.viscosity.curvature_step}};
    j["rates"] = {{"scales", c.rates.scales}, {"cap", c.rates.cap}, {"interior_knots", c.rates.interior_knots},
                  {"quadrature_points", c.rates.quadrature_points}, {"mode", c.rates.mode}};
    j["gamma"] = {{"tail_fraction", c.gamma.tail_fraction}, {"recovery_spacings", c.gamma.recovery_spacings},
                  {"epsilon_offset", c.gamma.epsilon_offset}, {"coercivity_bound", c.gamma.coercivity_bound},
                  {"coercivity_samples", c.gamma.coercivity_samples},
                  {"semigroup_tolerance", c.gamma.semigroup_tolerance},
                  {"partition_depth", c.gamma.partition_depth}, {"path_start", c.gamma.path_start},
                  {"path_end", c.gamma.path_end}};
    j["probes"] = {{"contraction_pairs", c.probes.contraction_pairs},
                   {"comparison_pairs", c.probes.comparison_pairs},
                   {"crandall_liggett_ns", c.probes.crandall_liggett_ns},
                   {"crandall_liggett_slack", c.probes.crandall_liggett_slack},
                   {"order_slack", c.probes.order_slack},
                   {"buc_tolerance", c.probes.buc_tolerance}};
    j["output"] = {{"formats", c.formats}};
    return j;
}

Scenario build_scenario(const RunConfig& c) {
    if (c.inline_scenario) return make_parametric_scenario(c.scenario, *c.inline_scenario, c.scenario_options);
    return make_scenario(c.scenario, c.scenario_options);
}

}  // namespace

RunOutcome run_checks(const RunConfig& config) {
    auto scenario = build_scenario(config);
    SemigroupOperator semigroup = scenario.limit_semigroup();
    auto factory = make_resolvent_factory(scenario.limit_lagrangian, scenario.grid, scenario.dt,
                                          config.resolvent.tolerance, config.resolvent.max_iterations);
    Context ctx{config, std::move(scenario), std::move(semigroup), std::move(factory),
                std::mt19937_64(config.seed), {}};

    RunOutcome out;
    out.pass = true;
    Json checks = Json::array();
    out.timing = Json::object();
    for (const auto& name : config.checks) {
        const double tol = name == "crandall_liggett" ? config.probes.crandall_liggett_slack : config.tolerance(name);
        const auto start = std::chrono::steady_clock::now();
        Json payload;
        if (name == "legendre") payload = check_legendre(ctx, tol);
        else if (name == "semigroup_law") payload = check_semigroup_law(ctx, tol);
        else if (name == "pseudo_resolvent") payload = check_pseudo_resolvent(ctx, tol);
        else if (name == "crandall_liggett") payload = check_crandall_liggett(ctx, tol);
        else if (name == "contraction") payload = check_contraction(ctx, tol);
        else if (name == "viscosity") payload = check_viscosity(ctx, tol);
        else if (name == "comparison") payload = check_comparison(ctx, tol);
        else if (name == "duality_gap") payload = check_duality_gap(ctx, tol);
        else if (name == "gamma_path") payload = check_gamma_path(ctx, tol);
        else if (name == "extended_limit") payload = check_extended_limit(ctx, tol);
        else throw ConfigError("unknown check '" + name + "'");
        Json entry{{"name", name}, {"tolerance", tol}};
        entry.update(payload);
        out.pass = out.pass && entry["pass"].get<bool>();
        checks.push_back(std::move(entry));
        out.timing[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }

    Json report;
    report["version"] = kVersion;
    report["config"] = config_echo(config);
    Json scenario_info{{"name", ctx.scenario.name},
                       {"description", ctx.scenario.description},
                       {"oracle", ctx.scenario.oracle}};
    Json params = Json::object();
    for (const auto& [k, v] : ctx.scenario.parameters) params[k] = v;
    scenario_info["parameters"] = params;
    report["scenario"] = scenario_info;
    report["checks"] = checks;
    report["counters"] = {{"clamp_events", ctx.counters.clamp_events},
                          {"saturation_events", ctx.counters.saturation_events},
                          {"snap_events", ctx.counters.snap_events}};
    report["pass"] = out.pass;
    out.report = std::move(report);
    return out;
}

std::string resolve_output_directory(const RunConfig& config, const std::optional<std::string>& out) {
    if (out) return *out;
    if (const char* env = std::getenv("HJGAMMA_OUT_DIR"); env && *env) return env;
    return config.output_directory;
}

int run_command(const std::string& config_path, std::optional<std::uint64_t> seed,
                const std::optional<std::string>& out) {
    try {
        auto config = load_config(config_path);
        if (seed) config.seed = *seed;
        const auto outcome = run_checks(config);
        const std::filesystem::path dir(resolve_output_directory(config, out));
        write_atomic((dir / "report.json").string(), serialize_report(outcome.report));
        write_atomic((dir / "timing.json").string(), outcome.timing.dump(2) + "\n");
        if (std::find(config.formats.begin(), config.formats.end(), "csv") != config.formats.end()) {
            for (const auto& curve : curve_names()) {
                try {
                    write_atomic((dir / (curve + ".csv")).string(), curve_csv(outcome.report, curve));
                } catch (const ConfigError&) {
                    // curve not produced by the selected checks
                }
            }
        }
        for (const auto& c : outcome.report["checks"]) {
            std::cout << (c["pass"].get<bool>() ? "PASS " : "FAIL ") << c["name"].get<std::string>() << "\n";
        }
        std::cout << "report: " << (dir / "report.json").string() << "\n";
        return outcome.pass ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

int list_command() {
    std::cout << "name\tn\tdescription\toracle\n";
    for (const auto& name : builtin_scenario_names()) {
        const auto s = make_scenario(name);
        std::string ns;
        for (double n : s.ns()) ns += (ns.empty() ? "" : ",") + std::to_string(static_cast<long>(n));
        std::cout << s.name << "\t" << ns << "\t" << s.description << "\t" << s.oracle << "\n";
    }
    return 0;
}

int emit_command(const std::string& report_path, const std::string& curve, const std::optional<std::string>& out) {
    try {
        const auto report = read_report(report_path);
        const auto csv = curve_csv(report, curve);
        std::filesystem::path dir;
        if (out) {
            dir = *out;
        } else if (const char* env = std::getenv("HJGAMMA_OUT_DIR"); env && *env) {
            dir = env;
        } else {
            dir = std::filesystem::path(report_path).parent_path();
        }
        const auto target = (dir / (curve + ".csv")).string();
        write_atomic(target, csv);
        std::cout << target << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace hjgamma::cli
