#pragma once

#include <stdexcept>
#include <functional>
#include <string_view>
#include <vector>

#include "rehab/rng.hpp"

namespace rehab {

enum class PatientMode { Stable = 0, Fatigued = 1, Unstable = 2 };

std::string_view to_string(PatientMode mode);
PatientMode parse_mode(std::string_view name);

struct PatientParams {
  double k_p = 2500.0;         // coupling stiffness, N/m
  double c_p = 0.0;            // coupling damping, N s/m
  double tau = 0.0;            // reaction latency, s
  double f0 = 0.5;             // movement fundamental, Hz
  double X_amp = 0.02;         // intended amplitude, m
  std::vector<double> harmonic_weights{0.2, 0.1};  // entry i weights harmonic i + 2
  double sigma_phase = 0.05;   // per-cycle phase jitter, rad
  double sigma_phase_unstable = 0.30;
  double force_target = 15.0;  // calibration target for peak contact force, N
  double phase_lead = 0.2;     // intent leads the reference fundamental, rad
  double tremor_amp = 0.0;     // involuntary oscillation amplitude, m
  double tremor_freq = 10.0;   // Hz

  void validate() const;
};

struct DisturbanceConfig {
  double magnitude = 8.0;  // N
  double duration = 0.05;  // s
  double mean_rate = 0.5;  // events per movement cycle
  bool enabled = false;

  void validate() const;
};

struct PatientKinematics {
  double x;
  double v;
};

// Slow drift of the intent's phase lead, linear between two times.
struct LeadDrift {
  double t_start = 0.0;
  double t_end = 0.0;
  double amount = 0.0;  // rad, reached at t_end and held afterwards
};

// Intended trajectory with per-cycle phase jitter. Jitter values are knots at
// cycle starts, interpolated linearly inside the cycle so the intent never
// jumps. Knots are addressed draws of the stream, so evaluation order does not
// matter.
class IntendedTrajectory {
 public:
  IntendedTrajectory(const PatientParams& params, const Stream& stream);

  // Jitter std per cycle index; cycles past the end reuse the last entry.
  void set_sigma_profile(std::vector<double> sigma_per_cycle);
  void set_lead_drift(const LeadDrift& drift) { drift_ = drift; }

  PatientKinematics operator()(double t) const;
  double knot(long cycle, int component) const;

  const PatientParams& params() const { return params_; }

 private:
  double sigma_at(long cycle) const;
  double lead_at(double t, double* rate) const;

  PatientParams params_;
  Stream stream_;
  std::vector<double> sigma_profile_;
  LeadDrift drift_;
  double tremor_phase_;
};

double contact_force(const PatientKinematics& intent, double x, double v, const PatientParams& params);

PatientParams apply_mode(const PatientParams& params, PatientMode mode);

struct Impulse {
  double onset;
  int sign;
};

// Poisson impulse train fixed at construction for the whole episode.
class ImpulseTrain {
 public:
  ImpulseTrain() = default;
  ImpulseTrain(const DisturbanceConfig& config, double f0, double duration, Stream stream);

  double operator()(double t) const;
  const std::vector<Impulse>& events() const { return events_; }

 private:
  DisturbanceConfig config_;
  std::vector<Impulse> events_;
};

struct CalibrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bisection on X_amp over [lo, hi] until peak_force(X_amp) is within rel_tol of
// the target. peak_force - target must change sign across the bracket.
double calibrate_amplitude(const PatientParams& params, const std::function<double(double)>& peak_force,
                           double lo, double hi, double rel_tol = 0.02, int max_steps = 40);

}  // namespace rehab
