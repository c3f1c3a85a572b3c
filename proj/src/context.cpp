#include "rehab/context.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "rehab/metrics.hpp"

namespace rehab {

void ContextThresholds::validate() const {
  if (!(lag_thr > 0.0 && dE_thr > 0.0 && var_thr > 0.0))
    throw std::invalid_argument("context: thresholds must be positive");
}

double circular_variance(std::span<const double> angles) {
  if (angles.size() < 2) return 0.0;
  std::complex<double> mean = 0.0;
  for (double a : angles) mean += std::polar(1.0, a);
  const double centre = std::arg(mean);
  double acc = 0.0;
  for (double a : angles) {
    const double d = std::remainder(a - centre, 2.0 * std::numbers::pi);
    acc += d * d;
  }
  return acc / static_cast<double>(angles.size());
}

ContextFeatures extract_features(std::span<const CycleTrace> recent, double baseline_energy, double dt,
                                 long window_id, double lag_reference) {
  ContextFeatures f;
  f.window_id = window_id;
  if (recent.empty() || !(baseline_energy > 0.0)) return f;

  double energy = 0.0, lag = 0.0;
  std::vector<double> phases;
  for (const auto& cycle : recent) {
    energy += cycle.energy;
    const int half = static_cast<int>(cycle.force.size() / 2);
    lag += xcorr_lag(cycle.force, cycle.velocity, half) * dt;
    phases.push_back(fundamental_phase(cycle.force));
  }
  const auto n = static_cast<double>(recent.size());
  f.dE_rel = (energy / n - baseline_energy) / baseline_energy;
  f.phase_lag = lag / n - lag_reference;
  f.phase_var = circular_variance(phases);
  f.valid = true;
  return f;
}

PatientMode classify(const ContextFeatures& f, const ContextThresholds& t) {
  if (f.phase_var > t.var_thr) return PatientMode::Unstable;
  if (f.phase_lag > t.lag_thr && f.dE_rel < -t.dE_thr) return PatientMode::Fatigued;
  return PatientMode::Stable;
}

namespace {
double toward(double value, double target, double step) {
  if (value < target) return std::min(value + step, target);
  return std::max(value - step, target);
}
}  // namespace

ImpedanceParams behavior_policy(PatientMode label, const ImpedanceParams& theta, const PolicyConfig& cfg) {
  switch (label) {
    case PatientMode::Fatigued:
      return theta.with(toward(theta.k, cfg.fatigued_k, cfg.step_k), toward(theta.c, cfg.fatigued_c, cfg.step_c))
          .clamped();
    case PatientMode::Stable: return theta.with(theta.k + cfg.step_k, theta.c).clamped();
    case PatientMode::Unstable: return theta.with(theta.k, toward(theta.c, cfg.unstable_c, cfg.step_c)).clamped();
  }
  return theta;
}

AccuracyReport evaluate_accuracy(std::span<const ContextDecision> decisions, long min_windows) {
  AccuracyReport r;
  r.n = static_cast<long>(decisions.size());
  r.underpowered = r.n < min_windows;
  if (r.n == 0) return r;
  const auto correct = std::count_if(decisions.begin(), decisions.end(),
                                     [](const ContextDecision& d) { return d.label == d.truth; });
  r.accuracy = static_cast<double>(correct) / static_cast<double>(r.n);
  r.ci_half_width = 1.96 * std::sqrt(r.accuracy * (1.0 - r.accuracy) / static_cast<double>(r.n));
  return r;
}

namespace {
double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}
}  // namespace

double calibrate_var_threshold(std::vector<double> stable_vars, std::vector<double> unstable_vars) {
  return 0.5 * (median(std::move(stable_vars)) + median(std::move(unstable_vars)));
}

}  // namespace rehab
