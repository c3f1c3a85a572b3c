#include "rehab/adaptation.hpp"

#include <algorithm>

namespace rehab {

void AdaptState::validate() const {
  if (window < 1) throw std::invalid_argument("adaptation: window must be >= 1");
  if (!(eta > 0.0)) throw std::invalid_argument("adaptation: eta must be positive");
  if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("adaptation: rho must be in (0, 1]");
  if (delta_k < 0.0 || delta_c < 0.0) throw std::invalid_argument("adaptation: step sizes must be non-negative");
  theta_base.validate();
}

double baseline(const std::vector<double>& history, int window) {
  if (history.empty()) throw std::invalid_argument("baseline: empty history");
  const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(std::max(window, 1)), history.size());
  double sum = 0.0;
  for (std::size_t i = history.size() - n; i < history.size(); ++i) sum += history[i];
  return sum / static_cast<double>(n);
}

ImpedanceParams perturb(AdaptState& state, Stream& rng) {
  if (state.frozen) return state.theta_base;
  state.p_k = rng.sign();
  state.p_c = rng.sign();
  return state.theta_base
      .with(state.theta_base.k + state.p_k * state.delta_k, state.theta_base.c + state.p_c * state.delta_c)
      .clamped();
}

AdaptState update(const AdaptState& state, double energy, double base) {
  AdaptState next = state;
  next.history.push_back(energy);
  next.last_committed = false;
  if (state.frozen || (state.p_k == 0 && state.p_c == 0)) return next;
  const double dk = state.p_k * state.delta_k * state.eta;
  const double dc = state.p_c * state.delta_c * state.eta;
  if (energy < base) {
    next.theta_base = state.theta_base.with(state.theta_base.k + dk, state.theta_base.c + dc).clamped();
    next.last_committed = true;
  } else {
    next.theta_base =
        state.theta_base.with(state.theta_base.k - state.rho * dk, state.theta_base.c - state.rho * dc).clamped();
  }
  return next;
}

}  // namespace rehab
