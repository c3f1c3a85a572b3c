#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace rehab {

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

struct PlantConfig {
  double m_eff = 1.0;
  double dt_phys = 1e-3;
  double x0 = 0.0;
  double v0 = 0.0;

  void validate() const;
};

struct ImpedanceParams {
  double k = 5000.0;
  double c = 20.0;
  double k_min = 3000.0, k_max = 8000.0;
  double c_min = 10.0, c_max = 40.0;

  bool within_bounds() const {
    return k >= k_min && k <= k_max && c >= c_min && c <= c_max;
  }
  ImpedanceParams with(double k_new, double c_new) const {
    ImpedanceParams p = *this;
    p.k = k_new;
    p.c = c_new;
    return p;
  }
  ImpedanceParams clamped() const;
  void validate() const;
};

struct BodyState {
  double x = 0.0;
  double v = 0.0;
  double t = 0.0;
};

struct ModalProperties {
  double omega_n;
  double f_n;
  double zeta;
};

template <typename Scalar>
Scalar natural_frequency(Scalar k, Scalar m) {
  if (!(k > Scalar(0)) || !(m > Scalar(0))) throw DomainError("natural_frequency: k and m must be positive");
  using std::sqrt;
  return sqrt(k / m);
}

template <typename Scalar>
Scalar damping_ratio(Scalar k, Scalar c, Scalar m) {
  if (!(k > Scalar(0)) || !(c > Scalar(0)) || !(m > Scalar(0)))
    throw DomainError("damping_ratio: k, c and m must be positive");
  using std::sqrt;
  return c / (Scalar(2) * sqrt(k * m));
}

template <typename Scalar>
Scalar spring_energy(Scalar k, Scalar deflection) {
  if (!(k > Scalar(0))) throw DomainError("spring_energy: k must be positive");
  return Scalar(0.5) * k * deflection * deflection;
}

template <typename Scalar>
Scalar instantaneous_power(Scalar force, Scalar velocity) {
  return force * velocity;
}

ModalProperties modal_properties(double k, double c, double m);

// Semi-implicit Euler: velocity first, then position with the new velocity.
BodyState step(const BodyState& state, double total_force, const PlantConfig& config);

}  // namespace rehab
