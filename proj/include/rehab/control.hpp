#pragma once

#include <string_view>

#include "rehab/dynamics.hpp"
#include "rehab/sensing.hpp"

namespace rehab {

enum class PresetKind { Rigid, Soft, Adaptive };

std::string_view to_string(PresetKind kind);
PresetKind parse_preset(std::string_view name);

struct ControlPreset {
  PresetKind mode = PresetKind::Adaptive;
  ImpedanceParams params;

  static ControlPreset rigid();
  static ControlPreset soft();
  static ControlPreset adaptive(double k0, double c0);
};

struct ReferenceTrajectory {
  double amplitude = 0.02;  // m
  double f_ref = 0.5;       // Hz
  double offset = 0.0;      // m
};

struct ReferenceState {
  double x;
  double v;
};

ReferenceState reference(double t, const ReferenceTrajectory& traj);

// u = -k (x - x_ref) - c (v - v_ref)
inline double impedance_force(double x, double v, const ReferenceState& ref, const ImpedanceParams& params) {
  return -params.k * (x - ref.x) - params.c * (v - ref.v);
}

inline double impedance_force(const FusedObservation& obs, const ReferenceState& ref,
                              const ImpedanceParams& params) {
  return impedance_force(obs.position, obs.velocity_est, ref, params);
}

class ImpedanceController {
 public:
  explicit ImpedanceController(const ControlPreset& preset, double saturation = 0.0);

  // Returns false when the preset is fixed and the request was rejected.
  bool apply_params(double k, double c);

  // Holds the previous command when the observation is invalid.
  double command(const FusedObservation& obs, const ReferenceState& ref);
  double command(double x, double v, const ReferenceState& ref);

  const ImpedanceParams& params() const { return params_; }
  PresetKind mode() const { return mode_; }
  long clamp_count() const { return clamp_count_; }
  long rejected_count() const { return rejected_count_; }
  double last_command() const { return last_u_; }

 private:
  double saturate(double u) const;

  PresetKind mode_;
  ImpedanceParams params_;
  double saturation_;
  double last_u_ = 0.0;
  long clamp_count_ = 0;
  long rejected_count_ = 0;
};

}  // namespace rehab
