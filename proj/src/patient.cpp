#include "rehab/patient.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rehab {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

std::string_view to_string(PatientMode mode) {
  switch (mode) {
    case PatientMode::Stable: return "stable";
    case PatientMode::Fatigued: return "fatigued";
    case PatientMode::Unstable: return "unstable";
  }
  return "stable";
}

PatientMode parse_mode(std::string_view name) {
  if (name == "stable") return PatientMode::Stable;
  if (name == "fatigued") return PatientMode::Fatigued;
  if (name == "unstable") return PatientMode::Unstable;
  throw std::invalid_argument("unknown patient mode '" + std::string(name) + "'");
}

void PatientParams::validate() const {
  if (!(k_p > 0.0)) throw std::invalid_argument("patient: k_p must be positive");
  if (c_p < 0.0) throw std::invalid_argument("patient: c_p must be non-negative");
  if (tau < 0.0) throw std::invalid_argument("patient: tau must be non-negative");
  if (!(f0 > 0.0)) throw std::invalid_argument("patient: f0 must be positive");
  if (X_amp < 0.0) throw std::invalid_argument("patient: X_amp must be non-negative");
  if (sigma_phase < 0.0 || sigma_phase_unstable < 0.0)
    throw std::invalid_argument("patient: sigma_phase must be non-negative");
  if (force_target < 5.0 || force_target > 15.0)
    throw std::invalid_argument("patient: force_target must lie in [5, 15] N");
  if (harmonic_weights.size() > 6) throw std::invalid_argument("patient: at most 6 harmonics");
  if (tremor_amp < 0.0 || !(tremor_freq > 0.0)) throw std::invalid_argument("patient: bad tremor parameters");
}

void DisturbanceConfig::validate() const {
  if (!(magnitude >= 0.0) || !(duration > 0.0) || mean_rate < 0.0)
    throw std::invalid_argument("disturbance: magnitude >= 0, duration > 0, mean_rate >= 0 required");
}

IntendedTrajectory::IntendedTrajectory(const PatientParams& params, const Stream& stream)
    : params_(params), stream_(stream) {
  // slot 0 of the uniform lane belongs to the tremor phase
  tremor_phase_ = kTwoPi * stream_.uniform_at(0);
}

void IntendedTrajectory::set_sigma_profile(std::vector<double> sigma_per_cycle) {
  sigma_profile_ = std::move(sigma_per_cycle);
}

double IntendedTrajectory::sigma_at(long cycle) const {
  if (sigma_profile_.empty()) return params_.sigma_phase;
  const auto i = static_cast<std::size_t>(std::clamp<long>(cycle, 0, static_cast<long>(sigma_profile_.size()) - 1));
  return sigma_profile_[i];
}

double IntendedTrajectory::knot(long cycle, int component) const {
  cycle = std::max(cycle, 0L);
  const auto n_comp = static_cast<std::uint64_t>(params_.harmonic_weights.size() + 1);
  return sigma_at(cycle) * stream_.normal_at(static_cast<std::uint64_t>(cycle) * n_comp + component);
}

double IntendedTrajectory::lead_at(double t, double* rate) const {
  *rate = 0.0;
  if (drift_.amount == 0.0 || t <= drift_.t_start) return params_.phase_lead;
  if (t >= drift_.t_end) return params_.phase_lead + drift_.amount;
  const double span = drift_.t_end - drift_.t_start;
  *rate = drift_.amount / span;
  return params_.phase_lead + drift_.amount * (t - drift_.t_start) / span;
}

PatientKinematics IntendedTrajectory::operator()(double t) const {
  const double w = kTwoPi * params_.f0;
  const double period = 1.0 / params_.f0;
  const long cycle = static_cast<long>(std::floor(t / period));
  const double frac = t / period - static_cast<double>(cycle);

  double lead_rate = 0.0;
  const double lead = lead_at(t, &lead_rate);

  double x = 0.0, v = 0.0;
  const int n_comp = static_cast<int>(params_.harmonic_weights.size()) + 1;
  for (int j = 0; j < n_comp; ++j) {
    const double h = j + 1;
    const double weight = j == 0 ? 1.0 : params_.harmonic_weights[j - 1];
    const double k0 = knot(cycle, j), k1 = knot(cycle + 1, j);
    const double phase = h * lead + k0 + (k1 - k0) * frac;
    const double phase_rate = h * lead_rate + (k1 - k0) / period;
    const double arg = h * w * t + phase;
    x += weight * std::sin(arg);
    v += weight * std::cos(arg) * (h * w + phase_rate);
  }
  x *= params_.X_amp;
  v *= params_.X_amp;

  if (params_.tremor_amp > 0.0) {
    const double wt = kTwoPi * params_.tremor_freq;
    x += params_.tremor_amp * std::sin(wt * t + tremor_phase_);
    v += params_.tremor_amp * wt * std::cos(wt * t + tremor_phase_);
  }
  return {x, v};
}

double contact_force(const PatientKinematics& intent, double x, double v, const PatientParams& params) {
  return params.k_p * (intent.x - x) + params.c_p * (intent.v - v);
}

PatientParams apply_mode(const PatientParams& params, PatientMode mode) {
  PatientParams out = params;
  switch (mode) {
    case PatientMode::Stable: break;
    case PatientMode::Fatigued:
      out.k_p *= 0.8;
      out.tau += 0.080;
      break;
    case PatientMode::Unstable: out.sigma_phase = params.sigma_phase_unstable; break;
  }
  return out;
}

ImpulseTrain::ImpulseTrain(const DisturbanceConfig& config, double f0, double duration, Stream stream)
    : config_(config) {
  if (!config.enabled || config.mean_rate <= 0.0) return;
  const double rate_per_s = config.mean_rate * f0;
  double t = stream.exponential(rate_per_s);
  while (t < duration) {
    events_.push_back({t, stream.sign()});
    t += stream.exponential(rate_per_s);
  }
}

double ImpulseTrain::operator()(double t) const {
  if (!config_.enabled) return 0.0;
  // events are sorted; find the last onset not after t
  auto it = std::upper_bound(events_.begin(), events_.end(), t,
                             [](double value, const Impulse& e) { return value < e.onset; });
  double force = 0.0;
  // pulses may overlap when onsets are close; contributions add
  while (it != events_.begin()) {
    --it;
    if (t - it->onset >= config_.duration) break;
    force += it->sign * config_.magnitude;
  }
  return force;
}

double calibrate_amplitude(const PatientParams& params, const std::function<double(double)>& peak_force,
                           double lo, double hi, double rel_tol, int max_steps) {
  const double target = params.force_target;
  double f_lo = peak_force(lo) - target;
  double f_hi = peak_force(hi) - target;
  if (std::abs(f_lo) <= rel_tol * target) return lo;
  if (std::abs(f_hi) <= rel_tol * target) return hi;
  if ((f_lo > 0.0) == (f_hi > 0.0))
    throw CalibrationError("calibrate_amplitude: target force not bracketed by [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "]");
  for (int i = 0; i < max_steps; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = peak_force(mid) - target;
    if (std::abs(f_mid) <= rel_tol * target) return mid;
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  throw CalibrationError("calibrate_amplitude: no convergence after " + std::to_string(max_steps) + " steps");
}

}  // namespace rehab
