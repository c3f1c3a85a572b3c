#pragma once

#include <cstdint>
#include <json.hpp>
#include <stdexcept>
#include <string>
#include <vector>

#include "rehab/context.hpp"
#include "rehab/control.hpp"
#include "rehab/dynamics.hpp"
#include "rehab/patient.hpp"
#include "rehab/sensing.hpp"

namespace rehab {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CalibrationConfig {
  bool enabled = true;
  // bracket for the intended amplitude, in multiples of the reference amplitude
  double lo = 0.5;
  double hi = 4.0;
};

struct SensorsConfig {
  double noise_rel = 0.05;
  double corr_time = 0.05;
  double force_rate = 1000.0;
  double imu_rate = 500.0;
  double position_rate = 60.0;
  double observer_bandwidth = 6.0;  // rad/s

  SensorSpec force() const { return {force_rate, noise_rel, corr_time}; }
  SensorSpec imu() const { return {imu_rate, noise_rel, corr_time}; }
  SensorSpec position() const { return {position_rate, noise_rel, corr_time}; }
};

struct ControlConfig {
  ReferenceTrajectory reference;
  double saturation = 0.0;  // N, 0 disables
  double k0 = 3000.0;       // adaptive start
  double c0 = 20.0;
  double lever = 0.15;      // m, force to joint moment
};

struct AdaptationConfig {
  double delta_k = 200.0;
  double delta_c = 2.0;
  double eta = 1.0;
  double rho = 0.5;
  int window = 10;
};

struct ContextConfig {
  ContextThresholds thresholds;
  PolicyConfig policy;
  int smoothing = 3;
  int baseline_window = 10;
  bool policy_enabled = true;  // used by the context protocol
};

struct ScheduleEntry {
  PatientMode mode = PatientMode::Stable;
  int from = 0;  // first cycle
  int to = 0;    // one past the last cycle
};

struct ProtocolConfig {
  int eval_start = 50;      // first cycle of steady-state averages
  int freeze_start = 50;
  int freeze_end = 70;
  double lead_drift = 0.0;  // rad of intent phase drift across the freeze window
  double delay_arm = 0.080; // s, extra latency in the delayed robustness arm
  int segment_cycles = 15;  // context protocol mode segment length
};

struct ExperimentConfig {
  std::string scenario = "f4";
  std::uint64_t seed = 1;
  int seed_count = 1;
  int cycles = 100;
  std::string preset = "adaptive";
  std::string output_dir = "out";
  PlantConfig plant;
  PatientParams patient;
  CalibrationConfig calibration;
  DisturbanceConfig disturbance;
  SensorsConfig sensors;
  ControlConfig control;
  AdaptationConfig adaptation;
  ContextConfig context;
  std::vector<ScheduleEntry> schedule;
  ProtocolConfig protocol;

  void validate() const;
  int ticks_per_cycle() const;
};

nlohmann::json to_json(const ExperimentConfig& config);
// Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

// Hex FNV-1a of the canonical JSON dump.
std::string config_hash(const ExperimentConfig& config);

const std::vector<std::string>& known_scenarios();

}  // namespace rehab
