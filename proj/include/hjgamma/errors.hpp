#pragma once

#include <stdexcept>
#include <string>

namespace hjgamma {

// Contract violations on construction or configuration (bad grid, bad window, ...).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A velocity or momentum window too small for the requested conjugate.
class WindowError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Fixed-point iteration did not reach its tolerance.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double residual, int iterations)
        : std::runtime_error(what), residual_(residual), iterations_(iterations) {}

    double residual() const { return residual_; }
    int iterations() const { return iterations_; }

private:
    double residual_;
    int iterations_;
};

// Saturating "infinite" value used for coercive walls and +inf Lagrangian entries.
inline constexpr double kSentinel = 1e12;

inline double saturate(double v) { return v >= kSentinel ? kSentinel : v; }

}  // namespace hjgamma
