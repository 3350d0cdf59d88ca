#pragma once

#include <cstddef>
#include <vector>

#include "hjgamma/grid.hpp"
#include "hjgamma/legendre.hpp"

namespace hjgamma {

/**
 * Quadratic test functions f(x) = p (x - x0) + (c / 2)(x - x0)^2 enumerated over
 * centers x x slopes x curvatures, in that (row-major) order. The additive constant
 * does not move argmax/argmin points and is omitted.
 */
class TestFunctionFamily {
public:
    TestFunctionFamily(std::vector<double> centers, std::vector<double> slopes, std::vector<double> curvatures);

    // 21 centers across the grid, 21 slopes on [-slope_window, slope_window],
    // curvatures on a fixed ladder of step curvature_step with |c| <= c_max.
    static TestFunctionFamily quadratic(const StateGrid& grid, double c_max = 10.0, std::size_t centers = 21,
                                        std::size_t slopes = 21, double slope_window = 2.0,
                                        double curvature_step = 2.5);

    struct Member {
        double x0;
        double p;
        double c;

        double value(double x) const { return p * (x - x0) + 0.5 * c * (x - x0) * (x - x0); }
        double gradient(double x) const { return p + c * (x - x0); }
    };

    std::size_t size() const { return centers_.size() * slopes_.size() * curvatures_.size(); }
    Member member(std::size_t i) const;
    double c_max() const;

private:
    std::vector<double> centers_;
    std::vector<double> slopes_;
    std::vector<double> curvatures_;
};

struct ViscosityOptions {
    double tolerance = 5e-2;
    bool keep_trace = false;
};

struct ViscosityTrace {
    std::size_t member = 0;
    double location = 0.0;
    double residual = 0.0;
};

struct ViscosityReport {
    bool pass = true;
    bool subsolution = true;  // which test was run
    double tolerance = 0.0;
    double worst = 0.0;       // max residual (sub) or min residual (super); 0 if nothing tested
    double location = 0.0;    // x* of the worst member
    std::size_t worst_member = 0;
    std::size_t family_size = 0;
    std::size_t tested = 0;
    std::size_t boundary_excluded = 0;  // extremum sits on a grid endpoint
    std::size_t window_skipped = 0;     // f'(x*) outside the Hamiltonian's window
    std::vector<ViscosityTrace> trace;
};

/**
 * For each test function, x* maximises u - f over the piecewise-linear interpolant of u
 * (exact per cell) and contributes u(x*) - lambda H(x*, f'(x*)) - h(x*). Passes iff the
 * worst contribution is <= tolerance.
 */
ViscosityReport subsolution_residual(const GridFunction& u, const HamiltonianModel& hamiltonian, double lambda,
                                     const GridFunction& h, const TestFunctionFamily& family,
                                     const ViscosityOptions& options = {});

// Mirror image: x* minimises v - f; passes iff the worst contribution is >= -tolerance.
ViscosityReport supersolution_residual(const GridFunction& v, const HamiltonianModel& hamiltonian, double lambda,
                                       const GridFunction& h, const TestFunctionFamily& family,
                                       const ViscosityOptions& options = {});

// sup(h1 - h2) - sup(u - v); negative means the comparison estimate fails for this pair.
double comparison_probe(const GridFunction& u, const GridFunction& v, const GridFunction& h1,
                        const GridFunction& h2);

}  // namespace hjgamma
