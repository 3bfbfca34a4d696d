#pragma once

#include <chrono>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rainbow/config.hpp"
#include "rainbow/io.hpp"

namespace rainbow {

// Per-run record: instance descriptor, the full config echo, family sizes,
// per-structure verification outcomes and diagnostics. A report can only
// claim success when every verification passed; timings are the one
// non-reproducible field.
struct DecompositionReport {
    std::string pipeline;
    std::string instance_description;
    std::string status = "ok";  // ok | rejected-hypothesis | error
    PipelineConfig config;
    std::vector<int> family_sizes;
    int structures_verified = 0;
    int verification_failures = 0;
    json diagnostics = json::object();
    double wall_ms = 0.0;

    bool success() const {
        return status == "ok" && verification_failures == 0;
    }

    json to_json(bool include_timings = true) const {
        json j;
        j["pipeline"] = pipeline;
        j["instance"] = instance_description;
        j["status"] = status;
        json cfg = json::object();
        for (const auto& [k, v] : config.to_map()) cfg[k] = v;
        j["config"] = cfg;
        j["family"] = {{"count", family_sizes.size()}, {"sizes", family_sizes}};
        j["verification"] = {{"structures_checked", structures_verified},
                             {"failures", verification_failures},
                             {"all_passed", verification_failures == 0}};
        j["diagnostics"] = diagnostics;
        if (include_timings) j["timings_ms"] = wall_ms;
        return j;
    }
};

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                         start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

inline void write_text_file(const std::string& path, const std::string& body) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << body;
}

}  // namespace rainbow
