#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "rehab/config.hpp"
#include "rehab/episode.hpp"

namespace rehab {

struct RunResult {
  ExperimentConfig config;
  double x_amp = 0.0;
  std::vector<EpisodeLog> logs;
  nlohmann::json summary;
};

std::vector<std::uint64_t> seed_list(const ExperimentConfig& config);

// Default mode schedule of the context protocol: Stable, Fatigued, Stable,
// Unstable segments repeated over the episode.
std::vector<ScheduleEntry> context_schedule(const ExperimentConfig& config);

std::vector<EpisodeSpec> plan_episodes(const ExperimentConfig& config, double x_amp);

// Calibrate, run every planned episode and summarize.
RunResult run_protocol(const ExperimentConfig& config);

// Pure function of the logs; report() calls it on logs loaded from disk.
nlohmann::json summarize(const ExperimentConfig& config, const std::vector<EpisodeLog>& logs);

bool all_passed(const nlohmann::json& summary);

// Return times (s) of isolated impulses in one episode; skipped and missing
// events are counted.
struct ReturnTimes {
  std::vector<double> values;
  int missing = 0;
  int skipped = 0;
};
ReturnTimes impulse_return_times(const ExperimentConfig& config, const EpisodeLog& log);

// Relative deviation of each cycle energy from the mean of the W before it,
// for cycles [from, end).
Eigen::ArrayXd energy_deviations(const std::vector<double>& energy, int window, int from);
// mean of kinetic + controller spring + coupling spring energy per cycle
std::vector<double> stored_energy_per_cycle(const ExperimentConfig& cfg, const EpisodeLog& log);

// Output layout: config.json, manifest.json, summary.json, one directory per
// episode with ticks.csv, cycles.csv, decisions.csv, and curves/*.csv.
void write_run(const RunResult& run, const std::string& dir);

struct ReportResult {
  nlohmann::json summary;
  bool matches_stored = false;
  bool hash_ok = false;
};

struct HashMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ReportResult report(const std::string& dir, bool allow_hash_mismatch);

}  // namespace rehab
