#include "hjgamma/viscosity.hpp"

#include <algorithm>
#include <cmath>

#include "hjgamma/errors.hpp"

namespace hjgamma {

TestFunctionFamily::TestFunctionFamily(std::vector<double> centers, std::vector<double> slopes,
                                       std::vector<double> curvatures)
    : centers_(std::move(centers)), slopes_(std::move(slopes)), curvatures_(std::move(curvatures)) {
    if (centers_.empty() || slopes_.empty() || curvatures_.empty()) {
        throw ConfigError("test function family needs at least one center, slope and curvature");
    }
}

TestFunctionFamily TestFunctionFamily::quadratic(const StateGrid& grid, double c_max, std::size_t centers,
                                                 std::size_t slopes, double slope_window, double curvature_step) {
    if (centers < 2 || slopes < 1) throw ConfigError("test family needs >= 2 centers and >= 1 slope");
    if (!(c_max >= 0.0) || !(curvature_step > 0.0)) throw ConfigError("bad curvature ladder");
    std::vector<double> xs(centers);
    for (std::size_t i = 0; i < centers; ++i) {
        xs[i] = grid.lower() + (grid.upper() - grid.lower()) * static_cast<double>(i) / (centers - 1);
    }
    std::vector<double> ps = slopes == 1 ? std::vector<double>{0.0} : symmetric_samples(slope_window, slopes);
    // Fixed step from zero, so a larger c_max only appends members.
    std::vector<double> cs{0.0};
    for (int k = 1; k * curvature_step <= c_max * (1.0 + 1e-12); ++k) {
        cs.push_back(k * curvature_step);
        cs.push_back(-k * curvature_step);
    }
    return TestFunctionFamily(std::move(xs), std::move(ps), std::move(cs));
}

TestFunctionFamily::Member TestFunctionFamily::member(std::size_t i) const {
    const std::size_t nc = curvatures_.size();
    const std::size_t np = slopes_.size();
    return {centers_.at(i / (np * nc)), slopes_[(i / nc) % np], curvatures_[i % nc]};
}

double TestFunctionFamily::c_max() const {
    double m = 0.0;
    for (double c : curvatures_) m = std::max(m, std::abs(c));
    return m;
}

namespace {

struct Extremum {
    double x;
    double value;  // u(x) - f(x)
};

// Extremum of (interpolant of u) - f. sign = +1 for max, -1 for min.
Extremum extremum_of_difference(const GridFunction& u, const TestFunctionFamily::Member& f, double sign) {
    const auto& grid = u.grid();
    Extremum best{grid.node(0), sign * (u[0] - f.value(grid.node(0)))};
    auto consider = [&](double x, double d) {
        if (sign * d > best.value) best = {x, sign * d};
    };
    for (std::size_t i = 0; i + 1 < grid.nodes(); ++i) {
        const double a = grid.node(i), b = grid.node(i + 1);
        consider(b, u[i + 1] - f.value(b));
        if (f.c != 0.0) {
            const double slope = (u[i + 1] - u[i]) / (b - a);
            const double xs = f.x0 + (slope - f.p) / f.c;
            if (xs > a && xs < b) {
                const double ux = u[i] + slope * (xs - a);
                consider(xs, ux - f.value(xs));
            }
        }
    }
    best.value *= sign;
    return best;
}

ViscosityReport residual_check(const GridFunction& u, const HamiltonianModel& hamiltonian, double lambda,
                               const GridFunction& h, const TestFunctionFamily& family,
                               const ViscosityOptions& options, bool sub) {
    if (!(u.grid() == h.grid())) throw ConfigError("viscosity check needs u and h on the same grid");
    if (!(lambda > 0.0)) throw ConfigError("viscosity check needs lambda > 0");
    const auto& grid = u.grid();
    const double sign = sub ? 1.0 : -1.0;
    const double edge = 1e-12 * grid.spacing();

    ViscosityReport report;
    report.subsolution = sub;
    report.tolerance = options.tolerance;
    report.family_size = family.size();
    bool first = true;
    for (std::size_t i = 0; i < family.size(); ++i) {
        const auto f = family.member(i);
        const auto ext = extremum_of_difference(u, f, sign);
        if (ext.x <= grid.lower() + edge || ext.x >= grid.upper() - edge) {
            ++report.boundary_excluded;
            continue;
        }
        double hv;
        try {
            hv = hamiltonian.at(ext.x, f.gradient(ext.x));
        } catch (const WindowError&) {
            ++report.window_skipped;
            continue;
        }
        const double r = u(ext.x) - lambda * hv - h(ext.x);
        ++report.tested;
        if (options.keep_trace) report.trace.push_back({i, ext.x, r});
        if (first || sign * r > sign * report.worst) {
            report.worst = r;
            report.location = ext.x;
            report.worst_member = i;
            first = false;
        }
    }
    report.pass = sub ? report.worst <= options.tolerance : report.worst >= -options.tolerance;
    return report;
}

}  // namespace

ViscosityReport subsolution_residual(const GridFunction& u, const HamiltonianModel& hamiltonian, double lambda,
                                     const GridFunction& h, const TestFunctionFamily& family,
                                     const ViscosityOptions& options) {
    return residual_check(u, hamiltonian, lambda, h, family, options, true);
}

ViscosityReport supersolution_residual(const GridFunction& v, const HamiltonianModel& hamiltonian, double lambda,
                                       const GridFunction& h, const TestFunctionFamily& family,
                                       const ViscosityOptions& options) {
    return residual_check(v, hamiltonian, lambda, h, family, options, false);
}

double comparison_probe(const GridFunction& u, const GridFunction& v, const GridFunction& h1,
                        const GridFunction& h2) {
    return (h1 - h2).max() - (u - v).max();
}

}  // namespace hjgamma
