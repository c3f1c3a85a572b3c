#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <vector>

#include "rehab/dynamics.hpp"
#include "rehab/rng.hpp"

namespace rehab {

struct AdaptState {
  ImpedanceParams theta_base;
  double delta_k = 200.0;
  double delta_c = 2.0;
  double eta = 1.0;
  double rho = 0.5;
  int window = 10;
  std::vector<double> history;
  bool frozen = false;
  int p_k = 0;  // current perturbation signs, 0 before the first draw
  int p_c = 0;
  bool last_committed = false;

  void validate() const;
};

// Trapezoidal work of F on v over the given samples.
template <typename DF, typename DV>
double cycle_energy(const Eigen::ArrayBase<DF>& force, const Eigen::ArrayBase<DV>& velocity, double dt) {
  const Eigen::Index n = force.size();
  if (n == 0 || velocity.size() != n) throw std::invalid_argument("cycle_energy: empty or mismatched series");
  if (n == 1) return 0.0;
  const auto power = (force.derived() * velocity.derived()).eval();
  return dt * (power.sum() - 0.5 * (power(0) + power(n - 1)));
}

// Mean of the newest min(window, size) entries.
double baseline(const std::vector<double>& history, int window);

// Draws p in {-1, +1}^2 and returns clamp(theta_base + p * delta). Frozen
// states return theta_base without drawing.
ImpedanceParams perturb(AdaptState& state, Stream& rng);

// Sign rule: commit the perturbation direction when energy fell below the
// baseline, back off by rho otherwise. History grows even when frozen.
AdaptState update(const AdaptState& state, double energy, double base);

}  // namespace rehab
