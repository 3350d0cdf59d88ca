#include "report_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "hjgamma/errors.hpp"

namespace hjgamma::cli {

void write_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path temp = target.string() + ".tmp";
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + temp.string());
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("short write to " + temp.string());
    }
    fs::rename(temp, target);
}

std::string serialize_report(const Json& report) { return report.dump(2) + "\n"; }

Json read_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open report");
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

std::vector<std::string> curve_names() { return {"crandall_liggett", "gamma_trace", "duality_gap"}; }

namespace {

const Json* find_check(const Json& report, const std::string& name) {
    if (!report.contains("checks")) return nullptr;
    for (const auto& c : report["checks"]) {
        if (c.value("name", "") == name) return &c;
    }
    return nullptr;
}

std::string number(const Json& v) {
    if (v.is_null()) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v.get<double>());
    return buf;
}

}  // namespace

std::string curve_csv(const Json& report, const std::string& curve) {
    std::ostringstream os;
    if (curve == "crandall_liggett") {
        const auto* c = find_check(report, "crandall_liggett");
        if (!c || !c->contains("curve")) throw ConfigError("report has no crandall_liggett curve");
        os << "n,gap\n";
        for (const auto& p : (*c)["curve"]) os << p["n"].get<int>() << "," << number(p["gap"]) << "\n";
        return os.str();
    }
    if (curve == "gamma_trace") {
        const auto* c = find_check(report, "gamma_path");
        if (!c || !c->contains("trace")) throw ConfigError("report has no gamma_trace curve");
        const auto& ns = (*c)["ns"];
        const auto& values = (*c)["trace"];
        os << "n,value,limit\n";
        for (std::size_t i = 0; i < values.size(); ++i) {
            os << number(ns[i]) << "," << number(values[i]) << "," << number((*c)["limit"]) << "\n";
        }
        return os.str();
    }
    if (curve == "duality_gap") {
        const auto* c = find_check(report, "duality_gap");
        if (!c || !c->contains("curve")) throw ConfigError("report has no duality_gap curve");
        os << "m,primal,dual,gap\n";
        for (const auto& p : (*c)["curve"]) {
            os << number(p["m"]) << "," << number(p["primal"]) << "," << number(p["dual"]) << ","
               << number(p["gap"]) << "\n";
        }
        return os.str();
    }
    throw ConfigError("unknown curve '" + curve + "'");
}

}  // namespace hjgamma::cli
