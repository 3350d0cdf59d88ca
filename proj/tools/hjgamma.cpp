#include <cstdint>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Hamilton-Jacobi semigroup and Gamma-convergence checks"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    auto* run = app.add_subcommand("run", "run the checks named in a config file");
    run->add_option("--config", config_path, "YAML config (schema v1)")->required();
    run->add_option("--seed", seed, "override the config seed");
    run->add_option("--out", out, "output directory");

    app.add_subcommand("list", "list built-in scenarios");

    std::string report_path, curve;
    std::optional<std::string> emit_out;
    auto* emit = app.add_subcommand("emit", "write one curve of a report as CSV");
    emit->add_option("--report", report_path, "report.json from a run")->required();
    emit->add_option("--curve", curve, "crandall_liggett | gamma_trace | duality_gap")->required();
    emit->add_option("--out", emit_out, "output directory (default: next to the report)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (run->parsed()) return hjgamma::cli::run_command(config_path, seed, out);
    if (emit->parsed()) return hjgamma::cli::emit_command(report_path, curve, emit_out);
    return hjgamma::cli::list_command();
}
