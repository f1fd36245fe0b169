#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "hdicho/config.hpp"

namespace hdicho {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "1.0.0";

enum class Command {
    group_selftest,
    transition,
    dichotomy_verify,
    dichotomy_estimate,
    noncritical,
    expansive,
    fullline,
    floquet,
    audit
};

Command parse_command(const std::string& name);
std::string to_string(Command c);
std::vector<std::string> command_names();

enum ExitCode : int { kPositive = 0, kViolated = 1, kConfigError = 2, kNumericalFailure = 3 };

struct CsvTable {
    std::string name;  // file stem suffix
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::string render() const;
};

struct RunResult {
    Command command = Command::audit;
    nlohmann::json results;
    std::string verdict;
    std::vector<std::string> witnesses;
    int exit_code = kPositive;
    std::vector<CsvTable> tables;
    std::string error;  // set when the run failed
};

/// Dispatches one command. Never throws for analysis failures: they are
/// mapped onto the exit code and recorded in `error`.
RunResult run(const AnalysisConfig& config, Command command);

/// Full JSON report; the wall time lives inside the single "timestamp" object.
nlohmann::json make_report(const AnalysisConfig& config, const RunResult& result,
                           double wall_seconds);

/// Writes `contents` to a temporary sibling and renames it over `path`.
void write_atomic(const std::string& path, const std::string& contents);

}  // namespace hdicho
