#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rehab/config.hpp"

namespace rehab {

enum TickCol : int {
  kT, kX, kV, kXRef, kVRef, kFContact, kFDisturb, kU, kK, kC,
  kSensForce, kSensForceClean, kSensAccel, kSensAccelClean, kSensPos, kSensPosClean,
  kTickCols
};

const std::array<std::string, kTickCols>& tick_columns();

struct CycleRow {
  long index = 0;
  double E_cycle = 0.0;
  double E_diss = 0.0;
  double baseline = 0.0;  // learner baseline before this cycle's update, NaN when empty
  double r = 0.0;         // NaN when undefined
  double moment_var = 0.0;
  double traj_rms = 0.0;
  double peak_force = 0.0;
  double phase_lag = 0.0;
  double k = 0.0;
  double c = 0.0;
  int committed = 0;
  std::string context_truth = "stable";
  std::string context_label = "none";  // "none" while features are not yet valid
};

const std::array<std::string, 14>& cycle_columns();

struct DecisionRow {
  long window = 0;
  ContextDecision decision;
  double k_request = 0.0;
  double c_request = 0.0;
};

// What distinguishes one episode of a protocol from another.
struct EpisodeSpec {
  std::string name;  // unique within a run, used as directory name
  std::string arm;   // arm label shared across seeds
  std::uint64_t seed = 1;
  int cycles = 100;
  PresetKind preset = PresetKind::Adaptive;
  bool learn = true;
  bool policy = false;
  bool surrogate = false;  // phase-randomized force in the energy feedback
  int freeze_start = -1;
  int freeze_end = -1;
  double lead_drift = 0.0;  // rad of intent phase drift over [drift_start, drift_end) cycles
  int drift_start = 0;
  int drift_end = 0;
  double extra_delay = 0.0;
  bool noise = true;
  bool impulses = false;
  bool jitter = true;
  double dt_phys = 0.0;  // 0 keeps the config value
  std::vector<ScheduleEntry> schedule;
  double x_amp = 0.0;  // intended amplitude after calibration
};

struct EpisodeLog {
  std::string name;
  std::string arm;
  std::uint64_t seed = 0;
  Eigen::ArrayXXd ticks;  // rows = control ticks, cols = TickCol
  std::vector<CycleRow> cycles;
  std::vector<DecisionRow> decisions;
  long clamp_count = 0;
};

// Plant, patient, sensors, observer, controller, learner and context wired at
// the 120 Hz tick; physics sub-steps at dt_phys in between.
EpisodeLog run_episode(const ExperimentConfig& config, const EpisodeSpec& spec);

// Fills the metric columns of `log.cycles` from the tick table. Used both at
// the end of a run and when loading logs from disk.
void compute_cycle_metrics(const ExperimentConfig& config, EpisodeLog& log);

// Mode active in each cycle for a schedule (Stable outside all spans).
std::vector<PatientMode> mode_profile(const std::vector<ScheduleEntry>& schedule, int cycles);

// Peak |contact force| over cycles 1..5 of a noiseless, jitter-free run.
double calibration_peak_force(const ExperimentConfig& config, double x_amp);
double calibrated_amplitude(const ExperimentConfig& config);

}  // namespace rehab
