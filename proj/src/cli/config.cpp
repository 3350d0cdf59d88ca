#include "config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "hjgamma/errors.hpp"

namespace hjgamma::cli {

std::vector<std::string> known_checks() {
    return {"legendre",  "semigroup_law", "pseudo_resolvent", "crandall_liggett", "contraction",
            "viscosity", "comparison",    "duality_gap",      "gamma_path",       "extended_limit"};
}

std::vector<std::string> default_checks() {
    return {"legendre",  "semigroup_law", "pseudo_resolvent", "crandall_liggett", "contraction",
            "viscosity", "comparison",    "duality_gap",      "gamma_path"};
}

double default_tolerance(const std::string& check) {
    static const std::map<std::string, double> table{
        {"legendre", 2e-2},   {"semigroup_law", 5e-2}, {"pseudo_resolvent", 5e-2}, {"crandall_liggett", 1e-3},
        {"contraction", 1e-9}, {"viscosity", 5e-2},    {"comparison", 5e-2},       {"duality_gap", 5e-2},
        {"gamma_path", 5e-2}, {"extended_limit", 1e-1}};
    auto it = table.find(check);
    if (it == table.end()) throw ConfigError("unknown check '" + check + "'");
    return it->second;
}

double RunConfig::tolerance(const std::string& check) const {
    auto it = tolerances.find(check);
    return it != tolerances.end() ? it->second : default_tolerance(check);
}

namespace {

class Reader {
public:
    explicit Reader(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(const YAML::Mark& mark, const std::string& message) const {
        std::ostringstream os;
        os << source_;
        if (!mark.is_null()) os << ":" << mark.line + 1 << ":" << mark.column + 1;
        os << ": " << message;
        throw ConfigError(os.str());
    }

    void require_map(const YAML::Node& node, const std::string& where) const {
        if (!node.IsMap()) fail(node.Mark(), "'" + where + "' must be a mapping");
    }

    void keys(const YAML::Node& node, const std::string& where, const std::set<std::string>& allowed) const {
        require_map(node, where);
        for (const auto& kv : node) {
            const auto key = kv.first.as<std::string>();
            if (!allowed.count(key)) {
                fail(kv.first.Mark(), "unknown key '" + key + "'" + (where.empty() ? "" : " in '" + where + "'"));
            }
        }
    }

    template <class T>
    void get(const YAML::Node& map, const std::string& key, T& out, const std::string& where) {
        const auto node = map[key];
        if (!node) return;
        marks_[where.empty() ? key : where + "." + key] = node.Mark();
        try {
            out = node.as<T>();
        } catch (const YAML::Exception&) {
            fail(node.Mark(), "'" + (where.empty() ? key : where + "." + key) + "' has the wrong type");
        }
    }

    template <class T>
    void get(const YAML::Node& map, const std::string& key, std::optional<T>& out, const std::string& where) {
        if (!map[key]) return;
        T value{};
        get(map, key, value, where);
        out = value;
    }

    YAML::Mark mark(const std::string& path) const {
        auto it = marks_.find(path);
        return it == marks_.end() ? YAML::Mark::null_mark() : it->second;
    }

    void remember(const std::string& path, const YAML::Mark& mark) { marks_[path] = mark; }

private:
    std::string source_;
    std::map<std::string, YAML::Mark> marks_;
};

void validate(const RunConfig& c, Reader& r) {
    auto guard = [&](const std::string& path, auto&& fn) {
        try {
            fn();
        } catch (const ConfigError& e) {
            r.fail(r.mark(path), path + ": " + e.what());
        }
    };
    auto positive = [&](const std::string& path, double v) {
        if (!(v > 0.0)) r.fail(r.mark(path), path + " must be > 0");
    };
    if (c.schema != kSchemaVersion) {
        r.fail(r.mark("schema"), "unsupported schema version " + std::to_string(c.schema) + " (expected 1)");
    }
    const auto& o = c.scenario_options;
    guard("grid", [&] { StateGrid(o.lower, o.upper, o.nodes); });
    guard("velocity_window", [&] { LagrangianModel::constant_quadratic(1.0, 0.0, o.vmax, o.velocity_samples); });
    positive("time.dt", o.dt);
    positive("time.horizon", c.horizon);
    if (o.dt * o.vmax > o.upper - o.lower) {
        r.fail(r.mark("time.dt"), "time.dt * velocity_window.vmax exceeds the grid length");
    }
    if (o.ns.empty()) r.fail(r.mark("scenario.ns"), "scenario.ns must not be empty");
    guard("scenario", [&] {
        if (c.inline_scenario) {
            make_parametric_scenario(c.scenario, *c.inline_scenario, o);
        } else {
            make_scenario(c.scenario, o);
        }
    });
    const auto known = known_checks();
    for (std::size_t i = 0; i < c.checks.size(); ++i) {
        if (std::find(known.begin(), known.end(), c.checks[i]) == known.end()) {
            r.fail(r.mark("checks." + std::to_string(i)), "unknown check '" + c.checks[i] + "'");
        }
    }
    for (const auto& [name, tol] : c.tolerances) {
        if (std::find(known.begin(), known.end(), name) == known.end()) {
            r.fail(r.mark("tolerances." + name), "tolerance for unknown check '" + name + "'");
        }
        positive("tolerances." + name, tol);
    }
    positive("resolvent.lambda", c.resolvent.lambda);
    positive("resolvent.tolerance", c.resolvent.tolerance);
    positive("resolvent.alpha", c.resolvent.alpha);
    positive("resolvent.beta", c.resolvent.beta);
    if (c.resolvent.max_iterations < 1) r.fail(r.mark("resolvent.max_iterations"), "must be >= 1");
    if (c.viscosity.c_max < 0.0) r.fail(r.mark("viscosity.c_max"), "viscosity.c_max must be >= 0");
    positive("viscosity.curvature_step", c.viscosity.curvature_step);
    positive("viscosity.slope_window", c.viscosity.slope_window);
    if (c.viscosity.centers < 2 || c.viscosity.slopes < 1) {
        r.fail(r.mark("viscosity"), "viscosity needs >= 2 centers and >= 1 slope");
    }
    if (c.rates.scales.empty()) r.fail(r.mark("rates.scales"), "rates.scales must not be empty");
    for (double m : c.rates.scales) positive("rates.scales", m);
    positive("rates.cap", c.rates.cap);
    if (c.rates.quadrature_points < 1) r.fail(r.mark("rates.quadrature_points"), "must be >= 1");
    if (c.rates.mode != "dual" && c.rates.mode != "primal") {
        r.fail(r.mark("rates.mode"), "rates.mode must be 'dual' or 'primal'");
    }
    if (!(c.gamma.tail_fraction > 0.0 && c.gamma.tail_fraction <= 1.0)) {
        r.fail(r.mark("gamma.tail_fraction"), "gamma.tail_fraction must lie in (0, 1]");
    }
    positive("gamma.recovery_spacings", c.gamma.recovery_spacings);
    positive("gamma.epsilon_offset", c.gamma.epsilon_offset);
    positive("gamma.semigroup_tolerance", c.gamma.semigroup_tolerance);
    if (c.gamma.coercivity_bound < 0.0) r.fail(r.mark("gamma.coercivity_bound"), "must be >= 0");
    {
        const StateGrid g(o.lower, o.upper, o.nodes);
        if (!g.contains(c.gamma.path_start) || !g.contains(c.gamma.path_end)) {
            r.fail(r.mark("gamma"), "gamma.path_start and gamma.path_end must lie in the grid");
        }
    }
    if (c.probes.crandall_liggett_ns.empty()) r.fail(r.mark("probes.crandall_liggett_ns"), "must not be empty");
    for (int n : c.probes.crandall_liggett_ns) {
        if (n < 1) r.fail(r.mark("probes.crandall_liggett_ns"), "entries must be >= 1");
    }
    positive("probes.buc_tolerance", c.probes.buc_tolerance);
    if (c.legendre.momentum_window) positive("legendre.momentum_window", *c.legendre.momentum_window);
    for (const auto& f : c.formats) {
        if (f != "json" && f != "csv") r.fail(r.mark("output.formats"), "unknown output format '" + f + "'");
    }
    if (std::find(c.formats.begin(), c.formats.end(), "json") == c.formats.end()) {
        r.fail(r.mark("output.formats"), "output.formats must include 'json'");
    }
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source) {
    Reader r(source);
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        r.fail(e.mark, e.msg);
    }
    RunConfig c;
    if (!root || root.IsNull()) r.fail(YAML::Mark::null_mark(), "empty configuration");
    r.keys(root, "",
           {"schema", "seed", "grid", "velocity_window", "time", "scenario", "checks", "tolerances", "resolvent",
            "viscosity", "rates", "gamma", "probes", "legendre", "output"});
    if (!root["schema"]) r.fail(root.Mark(), "missing 'schema' (expected 1)");
    r.get(root, "schema", c.schema, "");
    r.get(root, "seed", c.seed, "");

    auto& o = c.scenario_options;
    if (auto n = root["grid"]) {
        r.remember("grid", n.Mark());
        r.keys(n, "grid", {"lower", "upper", "nodes"});
        r.get(n, "lower", o.lower, "grid");
        r.get(n, "upper", o.upper, "grid");
        r.get(n, "nodes", o.nodes, "grid");
        if (n["nodes"]) r.remember("grid", n["nodes"].Mark());
    }
    if (auto n = root["velocity_window"]) {
        r.remember("velocity_window", n.Mark());
        r.keys(n, "velocity_window", {"vmax", "samples"});
        r.get(n, "vmax", o.vmax, "velocity_window");
        r.get(n, "samples", o.velocity_samples, "velocity_window");
    }
    if (auto n = root["time"]) {
        r.keys(n, "time", {"dt", "horizon"});
        r.get(n, "dt", o.dt, "time");
        r.get(n, "horizon", c.horizon, "time");
    }
    if (auto n = root["scenario"]) {
        r.remember("scenario", n.Mark());
        if (n.IsScalar()) {
            c.scenario = n.as<std::string>();
        } else {
            r.keys(n, "scenario", {"name", "inline", "ns", "initial_cost"});
            r.get(n, "name", c.scenario, "scenario");
            r.get(n, "ns", o.ns, "scenario");
            if (auto i = n["initial_cost"]) {
                r.keys(i, "scenario.initial_cost", {"center", "weight", "radius"});
                r.get(i, "center", o.initial_center, "scenario.initial_cost");
                r.get(i, "weight", o.initial_weight, "scenario.initial_cost");
                r.get(i, "radius", o.initial_radius, "scenario.initial_cost");
            }
            if (auto i = n["inline"]) {
                ParametricQuadratic p;
                r.keys(i, "scenario.inline", {"a0", "a1", "frequency", "b0", "b1", "limit_a", "limit_b"});
                r.get(i, "a0", p.a0, "scenario.inline");
                r.get(i, "a1", p.a1, "scenario.inline");
                r.get(i, "frequency", p.frequency, "scenario.inline");
                r.get(i, "b0", p.b0, "scenario.inline");
                r.get(i, "b1", p.b1, "scenario.inline");
                r.get(i, "limit_a", p.limit_a, "scenario.inline");
                r.get(i, "limit_b", p.limit_b, "scenario.inline");
                c.inline_scenario = p;
                if (!n["name"]) c.scenario = "inline";
            }
        }
    }
    if (auto n = root["checks"]) {
        if (!n.IsSequence()) r.fail(n.Mark(), "'checks' must be a list");
        for (std::size_t i = 0; i < n.size(); ++i) {
            r.remember("checks." + std::to_string(i), n[i].Mark());
            c.checks.push_back(n[i].as<std::string>());
        }
    } else {
        c.checks = default_checks();
    }
    if (auto n = root["tolerances"]) {
        r.require_map(n, "tolerances");
        for (const auto& kv : n) {
            const auto key = kv.first.as<std::string>();
            double v = 0.0;
            r.get(n, key, v, "tolerances");
            c.tolerances[key] = v;
        }
    }
    if (auto n = root["resolvent"]) {
        r.keys(n, "resolvent", {"lambda", "tolerance", "max_iterations", "alpha", "beta"});
        r.get(n, "lambda", c.resolvent.lambda, "resolvent");
        r.get(n, "tolerance", c.resolvent.tolerance, "resolvent");
        r.get(n, "max_iterations", c.resolvent.max_iterations, "resolvent");
        r.get(n, "alpha", c.resolvent.alpha, "resolvent");
        r.get(n, "beta", c.resolvent.beta, "resolvent");
    }
    if (auto n = root["viscosity"]) {
        r.remember("viscosity", n.Mark());
        r.keys(n, "viscosity", {"c_max", "centers", "slopes", "slope_window", "curvature_step"});
        r.get(n, "c_max", c.viscosity.c_max, "viscosity");
        r.get(n, "centers", c.viscosity.centers, "viscosity");
        r.get(n, "slopes", c.viscosity.slopes, "viscosity");
        r.get(n, "slope_window", c.viscosity.slope_window, "viscosity");
        r.get(n, "curvature_step", c.viscosity.curvature_step, "viscosity");
    }
    if (auto n = root["rates"]) {
        r.keys(n, "rates", {"scales", "cap", "interior_knots", "quadrature_points", "mode"});
        r.get(n, "scales", c.rates.scales, "rates");
        r.get(n, "cap", c.rates.cap, "rates");
        r.get(n, "interior_knots", c.rates.interior_knots, "rates");
        r.get(n, "quadrature_points", c.rates.quadrature_points, "rates");
        r.get(n, "mode", c.rates.mode, "rates");
    }
    if (auto n = root["gamma"]) {
        r.remember("gamma", n.Mark());
        r.keys(n, "gamma",
               {"tail_fraction", "recovery_spacings", "epsilon_offset", "coercivity_bound", "coercivity_samples",
                "semigroup_tolerance", "partition_depth", "path_start", "path_end"});
        r.get(n, "tail_fraction", c.gamma.tail_fraction, "gamma");
        r.get(n, "recovery_spacings", c.gamma.recovery_spacings, "gamma");
        r.get(n, "epsilon_offset", c.gamma.epsilon_offset, "gamma");
        r.get(n, "coercivity_bound", c.gamma.coercivity_bound, "gamma");
        r.get(n, "coercivity_samples", c.gamma.coercivity_samples, "gamma");
        r.get(n, "semigroup_tolerance", c.gamma.semigroup_tolerance, "gamma");
        r.get(n, "partition_depth", c.gamma.partition_depth, "gamma");
        r.get(n, "path_start", c.gamma.path_start, "gamma");
        r.get(n, "path_end", c.gamma.path_end, "gamma");
    }
    if (auto n = root["probes"]) {
        r.keys(n, "probes",
               {"contraction_pairs", "comparison_pairs", "crandall_liggett_ns", "crandall_liggett_slack",
                "order_slack", "buc_tolerance"});
        r.get(n, "contraction_pairs", c.probes.contraction_pairs, "probes");
        r.get(n, "comparison_pairs", c.probes.comparison_pairs, "probes");
        r.get(n, "crandall_liggett_ns", c.probes.crandall_liggett_ns, "probes");
        r.get(n, "crandall_liggett_slack", c.probes.crandall_liggett_slack, "probes");
        r.get(n, "order_slack", c.probes.order_slack, "probes");
        r.get(n, "buc_tolerance", c.probes.buc_tolerance, "probes");
    }
    if (auto n = root["legendre"]) {
        r.keys(n, "legendre", {"momentum_window", "momentum_samples"});
        r.get(n, "momentum_window", c.legendre.momentum_window, "legendre");
        r.get(n, "momentum_samples", c.legendre.momentum_samples, "legendre");
    }
    if (auto n = root["output"]) {
        r.keys(n, "output", {"directory", "formats"});
        r.get(n, "directory", c.output_directory, "output");
        r.get(n, "formats", c.formats, "output");
    }
    validate(c, r);
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open configuration file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

}  // namespace hjgamma::cli
