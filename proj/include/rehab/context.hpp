#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "rehab/dynamics.hpp"
#include "rehab/patient.hpp"

namespace rehab {

struct ContextFeatures {
  double dE_rel = 0.0;     // (E - baseline) / baseline
  double phase_lag = 0.0;  // s, force trailing velocity, relative to lag_reference
  double phase_var = 0.0;  // rad^2, spread of per-cycle force phase
  long window_id = 0;
  bool valid = false;
};

struct ContextThresholds {
  double lag_thr = 0.04;
  double dE_thr = 0.05;
  double var_thr = 0.04;  // midpoint of Stable/Unstable medians, seeds 1001-1010

  void validate() const;
};

struct ContextDecision {
  PatientMode label = PatientMode::Stable;
  PatientMode truth = PatientMode::Stable;
  ContextFeatures features;
};

// One completed cycle as seen by the sensors.
struct CycleTrace {
  Eigen::ArrayXd force;
  Eigen::ArrayXd velocity;
  double energy = 0.0;
};

// Features over the newest traces (typically three): energy and lag are
// averaged, phase spread is the circular variance of the force fundamental.
ContextFeatures extract_features(std::span<const CycleTrace> recent, double baseline_energy, double dt,
                                 long window_id, double lag_reference = 0.0);

double circular_variance(std::span<const double> angles);

PatientMode classify(const ContextFeatures& features, const ContextThresholds& thresholds);

struct PolicyConfig {
  double step_k = 200.0;
  double step_c = 2.0;
  double fatigued_k = 4500.0;
  double fatigued_c = 30.0;
  double unstable_c = 35.0;
};

// Requested impedance for the next cycle given the detected context; always
// inside theta's bounds.
ImpedanceParams behavior_policy(PatientMode label, const ImpedanceParams& theta, const PolicyConfig& config);

struct AccuracyReport {
  double accuracy = 0.0;
  double ci_half_width = 0.0;
  long n = 0;
  bool underpowered = true;
};

AccuracyReport evaluate_accuracy(std::span<const ContextDecision> decisions, long min_windows = 300);

// Midpoint between the medians of the two empirical phase_var samples.
double calibrate_var_threshold(std::vector<double> stable_vars, std::vector<double> unstable_vars);

}  // namespace rehab
