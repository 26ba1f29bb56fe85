#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "obscert/scenario.hpp"

namespace obscert {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNotAdmissible = 2;
inline constexpr int kExitVerificationFailed = 3;

struct RunOptions {
    std::vector<std::string> overrides;
    std::optional<std::string> out_dir;  // takes precedence over OBSCERT_OUT_DIR and the scenario
    std::optional<std::uint64_t> seed;
    std::string format;                  // json, csv or both; empty keeps the scenario's choice
    bool timestamp = true;
    int jobs = 0;
};

struct TaskOutcome {
    std::string name;
    std::string type;
    std::string status;  // ok, not-admissible, verification-failed, error, skipped
    std::string message;
    std::vector<std::string> artifacts;
};

struct RunResult {
    int exit_code = kExitOk;
    std::vector<TaskOutcome> tasks;
    std::vector<Diagnostic> diagnostics;
    std::vector<std::string> artifacts;  // paths relative to the output directory
    std::string output_directory;
};

// Runs every task in order and writes the artifacts. Parse and resolution problems are
// reported in diagnostics with exit code 1 and nothing is written.
RunResult run_scenario(const std::string& path, const RunOptions& opts);
RunResult run_scenario(const Scenario& scenario, const RunOptions& opts);

// Schema and reference checks; never touches the filesystem beyond reading the file.
std::vector<Diagnostic> validate_scenario(const std::string& path, const std::vector<std::string>& overrides = {});

}  // namespace obscert
