#pragma once

// Command-line front end. Each cmd_* throws on error; run() maps exceptions
// to exit codes and prints the diagnostic.

#include "wdc/config.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

namespace wdc::cli {

enum ExitCode : int { ok = 0, usage = 1, data_error = 2, causality_violation = 3 };

/// Pass, SLR observations and cycle schedules for a configured scenario.
struct Scenario {
    PassTrack pass;
    std::vector<SlrObservation> slr;
    std::vector<CycleSchedule> schedules;
};

Scenario prepare_scenario(const RunConfig& config, std::uint64_t seed);
std::uint64_t slr_noise_seed(std::uint64_t seed);

/// Writes timetags.csv, truth.jsonl, track.csv, slr.csv and the resolved config.
/// Throws ConfigError without a seed.
void cmd_simulate(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log);

struct AnalyzeFiles {
    std::filesystem::path timetags;
    std::filesystem::path track;
    std::optional<std::filesystem::path> slr;    ///< default: slr.csv beside the track
    std::optional<std::filesystem::path> truth;  ///< read only when given
};

/// Writes report.json, phase_bins.csv, phase_bins_b1.csv, histograms.csv.
/// Returns data_error when a pass-level fit did not converge.
int cmd_analyze(const RunConfig& config, const AnalyzeFiles& files,
                const std::filesystem::path& out_dir, std::ostream& log);

/// Builds schedules from `track` (or the configured pass) and checks every
/// cycle. Returns causality_violation on any violation, data_error when
/// there are no cycles to check.
int cmd_verify_causality(const RunConfig& config, const std::optional<std::filesystem::path>& track,
                         const std::optional<std::filesystem::path>& out_dir, std::ostream& log);

/// Human-readable summary of analysis and causality JSON files.
void cmd_report(const std::vector<std::filesystem::path>& inputs, std::ostream& out);

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace wdc::cli
