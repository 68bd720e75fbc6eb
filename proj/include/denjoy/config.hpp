#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace denjoy {

struct ParseError : std::invalid_argument {
    int line;
    ParseError(int line_, const std::string& message)
        : std::invalid_argument("line " + std::to_string(line_) + ": " + message), line(line_) {}
};

struct RunConfig {
    std::string command;
    int d = 0;
    std::vector<double> taus;
    std::vector<double> rhos;
    double base_point = 0.0;
    int window = 10;
    int M0 = 4;
    double A_base = 2.0;
    double growth_base = 4.0;
    std::string out_dir = ".";
    long seed = 0;
};

// Flat `key = value` format: `#` starts a comment, lists are comma-separated,
// `[section]` lines are ignored, duplicate keys are rejected.
RunConfig parse_config(const std::string& text);

// Executes the configured pipeline and writes its reports under out_dir.
// Returns 0; precondition and invariant failures surface as exceptions.
int run_command(const RunConfig& config);

}  // namespace denjoy
