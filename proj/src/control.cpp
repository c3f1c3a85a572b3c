#include "rehab/control.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rehab {

std::string_view to_string(PresetKind kind) {
  switch (kind) {
    case PresetKind::Rigid: return "rigid";
    case PresetKind::Soft: return "soft";
    case PresetKind::Adaptive: return "adaptive";
  }
  return "adaptive";
}

PresetKind parse_preset(std::string_view name) {
  if (name == "rigid") return PresetKind::Rigid;
  if (name == "soft") return PresetKind::Soft;
  if (name == "adaptive") return PresetKind::Adaptive;
  throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
}

ControlPreset ControlPreset::rigid() {
  return {PresetKind::Rigid, ImpedanceParams{10000.0, 40.0, 10000.0, 10000.0, 40.0, 40.0}};
}

ControlPreset ControlPreset::soft() {
  return {PresetKind::Soft, ImpedanceParams{2000.0, 20.0, 2000.0, 2000.0, 20.0, 20.0}};
}

ControlPreset ControlPreset::adaptive(double k0, double c0) {
  ControlPreset p{PresetKind::Adaptive, ImpedanceParams{k0, c0, 3000.0, 8000.0, 10.0, 40.0}};
  p.params.validate();
  return p;
}

ReferenceState reference(double t, const ReferenceTrajectory& traj) {
  const double w = 2.0 * std::numbers::pi * traj.f_ref;
  return {traj.offset + traj.amplitude * std::sin(w * t), traj.amplitude * w * std::cos(w * t)};
}

ImpedanceController::ImpedanceController(const ControlPreset& preset, double saturation)
    : mode_(preset.mode), params_(preset.params), saturation_(saturation) {
  params_.validate();
}

bool ImpedanceController::apply_params(double k, double c) {
  if (mode_ != PresetKind::Adaptive) {
    if (k != params_.k || c != params_.c) ++rejected_count_;
    return false;
  }
  const ImpedanceParams requested = params_.with(k, c);
  const ImpedanceParams applied = requested.clamped();
  if (applied.k != k || applied.c != c) ++clamp_count_;
  params_ = applied;
  return true;
}

double ImpedanceController::saturate(double u) const {
  return saturation_ > 0.0 ? std::clamp(u, -saturation_, saturation_) : u;
}

double ImpedanceController::command(const FusedObservation& obs, const ReferenceState& ref) {
  if (!obs.valid) return last_u_;
  last_u_ = saturate(impedance_force(obs, ref, params_));
  return last_u_;
}

double ImpedanceController::command(double x, double v, const ReferenceState& ref) {
  last_u_ = saturate(impedance_force(x, v, ref, params_));
  return last_u_;
}

}  // namespace rehab
