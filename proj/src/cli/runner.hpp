#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "config.hpp"
#include "report_io.hpp"

namespace hjgamma::cli {

inline constexpr const char* kVersion = "hjgamma 0.1.0";

struct RunOutcome {
    Json report;
    Json timing;
    bool pass = false;
};

// Executes the configured checks in declared order. Throws on configuration/runtime errors.
RunOutcome run_checks(const RunConfig& config);

// Output directory: --out, else HJGAMMA_OUT_DIR, else the config's output.directory.
std::string resolve_output_directory(const RunConfig& config, const std::optional<std::string>& out);

// Exit status 0 (pass), 1 (a check failed) or 2 (configuration or runtime error).
int run_command(const std::string& config_path, std::optional<std::uint64_t> seed,
                const std::optional<std::string>& out);
int list_command();
int emit_command(const std::string& report_path, const std::string& curve, const std::optional<std::string>& out);

}  // namespace hjgamma::cli
