#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace hjgamma::cli {

using Json = nlohmann::ordered_json;

// Writes through a sibling temp file and renames it into place.
void write_atomic(const std::string& path, const std::string& content);

std::string serialize_report(const Json& report);
Json read_report(const std::string& path);

std::vector<std::string> curve_names();

// CSV text for one curve of a report. Throws ConfigError if the report lacks it.
std::string curve_csv(const Json& report, const std::string& curve);

}  // namespace hjgamma::cli
