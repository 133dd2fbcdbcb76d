#pragma once

// Scenario configuration (JSON, comments allowed), output writers and the
// command implementations behind the `feynbody` executable.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "feynbody/integrator.hpp"
#include "feynbody/trajectory.hpp"
#include "json.hpp"

namespace feynbody {

struct ScenarioConfig {
    RunConfig run;
    HistoryOptions history;
    std::vector<ChargeSpec> charges;
    std::vector<PastSpec> pasts;
    std::filesystem::path out_dir = "out";
    std::size_t stride = 1;
    bool diagnostics = true;
    nlohmann::json echo;  ///< the parsed document, for summary.json
};

/// Parses and validates a scenario. Table paths resolve against `base_dir`.
/// Throws InvalidConfig with the line (syntax errors) or field path (schema
/// errors) in the message.
ScenarioConfig parse_scenario(const std::string& text, const std::filesystem::path& base_dir = ".");
ScenarioConfig load_scenario(const std::filesystem::path& path);

TrajectoryHistory build_history(const ScenarioConfig& cfg);

/// Fixed 17-significant-digit formatting used by every output file.
std::string format_real(double x);

void write_trajectory_csv(std::ostream& out, const RunResult& res, std::size_t stride);
void write_diagnostics_csv(std::ostream& out, const RunResult& res, std::size_t stride);
void write_events_jsonl(std::ostream& out, const RunResult& res);
nlohmann::json summary_json(const RunResult& res, const ScenarioConfig& cfg, double wall_seconds);

/// Writes trajectory.csv, diagnostics.csv (if enabled), events.jsonl and summary.json.
void write_outputs(const std::filesystem::path& dir, const RunResult& res, const ScenarioConfig& cfg,
                   double wall_seconds);

struct InspectReport {
    bool singular = false;
    std::string verdict;
    std::vector<double> det_phi;  ///< per charge, coupling form in use
    std::vector<double> speeds;   ///< per charge, fraction of c
    double min_distance = 0.0;
};

InspectReport inspect(const ScenarioConfig& cfg);

/// Exit status: 0 completed, 2 singular terminator or singular t = 0, 1 config error.
int cmd_run(const std::filesystem::path& config, std::optional<unsigned> workers,
            std::optional<std::filesystem::path> out_dir, std::ostream& log);

/// Exit status: 0 when every oracle passes, 3 otherwise, 1 for an unknown suite.
int cmd_validate(const std::string& suite, const std::filesystem::path& out_dir, CouplingForm form,
                 std::ostream& log);

/// Exit status: 0 nonsingular, 2 singular, 1 config error.
int cmd_inspect(const std::filesystem::path& config, std::ostream& log);

}  // namespace feynbody
