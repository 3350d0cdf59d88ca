#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hjgamma/gamma.hpp"

namespace hjgamma::cli {

inline constexpr int kSchemaVersion = 1;

struct ResolventKnobs {
    double lambda = 0.5;
    double tolerance = 1e-8;
    int max_iterations = 200000;
    double alpha = 0.5;  // pseudo-resolvent pair
    double beta = 1.0;
};

struct ViscosityKnobs {
    double c_max = 10.0;
    std::size_t centers = 21;
    std::size_t slopes = 21;
    double slope_window = 2.0;
    double curvature_step = 2.5;
};

struct RateKnobs {
    std::vector<double> scales{1, 2, 4, 8, 16};
    double cap = 1.0;
    std::size_t interior_knots = 3;
    int quadrature_points = 8;
    std::string mode = "dual";
};

struct GammaKnobs {
    double tail_fraction = 1.0 / 3.0;
    double recovery_spacings = 2.0;
    double epsilon_offset = 4.0;
    double coercivity_bound = 0.5;
    std::size_t coercivity_samples = 32;
    double semigroup_tolerance = 0.1;
    std::size_t partition_depth = 2;  // dyadic partitions of depth 0..d
    double path_start = 0.0;
    double path_end = 1.0;
};

struct ProbeKnobs {
    std::size_t contraction_pairs = 20;
    std::size_t comparison_pairs = 20;
    std::vector<int> crandall_liggett_ns{1, 2, 4, 8, 16};
    double crandall_liggett_slack = 1e-3;
    double order_slack = 1e-12;
    double buc_tolerance = 1e-2;
};

struct LegendreKnobs {
    std::optional<double> momentum_window;        // default vmax / 2
    std::optional<std::size_t> momentum_samples;  // default: velocity samples
};

struct RunConfig {
    int schema = kSchemaVersion;
    std::uint64_t seed = 0;
    ScenarioOptions scenario_options{};
    double horizon = 1.0;
    std::string scenario = "identity";
    std::optional<ParametricQuadratic> inline_scenario;
    std::vector<std::string> checks;
    std::map<std::string, double> tolerances;
    ResolventKnobs resolvent{};
    ViscosityKnobs viscosity{};
    RateKnobs rates{};
    GammaKnobs gamma{};
    ProbeKnobs probes{};
    LegendreKnobs legendre{};
    std::string output_directory = "out";
    std::vector<std::string> formats{"json", "csv"};

    double tolerance(const std::string& check) const;
};

std::vector<std::string> known_checks();
std::vector<std::string> default_checks();
double default_tolerance(const std::string& check);

// Parses schema-v1 YAML. Errors are ConfigError with "source:line:column: message".
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

}  // namespace hjgamma::cli
