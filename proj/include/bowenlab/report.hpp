#pragma once

#include <map>
#include <string>

#include "bowenlab/systems.hpp"

namespace bowenlab {

/// Batch experiment configuration (one JSON document; unknown keys rejected).
struct RunConfig {
    std::string system_name = "cat";
    std::map<std::string, double> system_params;
    std::uint64_t seed = 0;
    std::string suite = "distortion"; // linearize | distortion | spectrum | splitting | full
    double eps = 0.1;
    double delta = 0.01;
    double rho = 0.3;
    int p_max = 10;
    int horizon = 60;
    int centers = 16;
    std::uint64_t budget = 100000;
    std::string out_dir = ".";

    static RunConfig from_json_text(const std::string& text);
    static RunConfig from_json_file(const std::string& path);
    void validate() const; // throws usage_error
};

struct RunReport {
    std::map<std::string, std::string> verdicts; // check name -> pass/fail/warn
    std::map<std::string, double> metrics;
    double wall_time = 0.0;
    bool any_fail() const;
};

// Executes the named suite: writes <out_dir>/<suite>.csv (and the spectrum
// table for the splitting suite) plus report.json, atomically. Returns the
// report; exit code mapping is 0 = all pass, 1 = some check failed.
RunReport run_suite(const RunConfig& config);

} // namespace bowenlab
