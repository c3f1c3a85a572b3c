#include "rehab/dynamics.hpp"

#include <algorithm>
#include <numbers>
#include <sstream>

namespace rehab {

void PlantConfig::validate() const {
  if (!(m_eff > 0.0)) throw DomainError("plant: m_eff must be positive");
  if (!(dt_phys > 0.0) || dt_phys > 0.002) throw DomainError("plant: dt_phys must be in (0, 0.002]");
  if (!std::isfinite(x0) || !std::isfinite(v0)) throw DomainError("plant: initial state must be finite");
}

ImpedanceParams ImpedanceParams::clamped() const {
  ImpedanceParams p = *this;
  p.k = std::clamp(k, k_min, k_max);
  p.c = std::clamp(c, c_min, c_max);
  return p;
}

void ImpedanceParams::validate() const {
  if (!(k_min > 0.0 && c_min > 0.0 && k_min <= k_max && c_min <= c_max))
    throw DomainError("impedance: bounds must be positive and ordered");
  if (!within_bounds()) throw DomainError("impedance: (k, c) outside bounds");
}

ModalProperties modal_properties(double k, double c, double m) {
  const double w = natural_frequency(k, m);
  return {w, w / (2.0 * std::numbers::pi), damping_ratio(k, c, m)};
}

BodyState step(const BodyState& state, double total_force, const PlantConfig& config) {
  if (!std::isfinite(total_force)) {
    std::ostringstream msg;
    msg << "step: non-finite force at t=" << state.t << " (x=" << state.x << ", v=" << state.v << ")";
    throw DomainError(msg.str());
  }
  BodyState next;
  next.v = state.v + total_force / config.m_eff * config.dt_phys;
  next.x = state.x + next.v * config.dt_phys;
  next.t = state.t + config.dt_phys;
  return next;
}

}  // namespace rehab
