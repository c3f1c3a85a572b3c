#pragma once

#include <Eigen/Core>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "rehab/rng.hpp"

namespace rehab {

// Pearson correlation; missing when either series has zero variance.
template <typename DA, typename DB>
std::optional<double> force_velocity_correlation(const Eigen::ArrayBase<DA>& a, const Eigen::ArrayBase<DB>& b) {
  if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("correlation: need equal lengths >= 2");
  const auto da = (a.derived() - a.mean()).eval();
  const auto db = (b.derived() - b.mean()).eval();
  const double saa = da.square().sum();
  const double sbb = db.square().sum();
  if (saa <= 0.0 || sbb <= 0.0) return std::nullopt;
  return (da * db).sum() / std::sqrt(saa * sbb);
}

template <typename D>
double population_variance(const Eigen::ArrayBase<D>& a) {
  if (a.size() == 0) return 0.0;
  return (a.derived() - a.mean()).square().mean();
}

template <typename D>
double moment_variance(const Eigen::ArrayBase<D>& u, double lever) {
  if (!(lever > 0.0)) throw std::invalid_argument("moment_variance: lever must be positive");
  return population_variance((u.derived() * lever).eval());
}

template <typename DX, typename DR>
double trajectory_rms(const Eigen::ArrayBase<DX>& x, const Eigen::ArrayBase<DR>& x_ref) {
  if (x.size() != x_ref.size()) throw std::invalid_argument("trajectory_rms: mismatched series");
  if (x.size() == 0) return 0.0;
  return std::sqrt((x.derived() - x_ref.derived()).square().mean());
}

template <typename DV, typename DC>
double dissipated_energy(const Eigen::ArrayBase<DV>& v, const Eigen::ArrayBase<DC>& c, double dt) {
  if (v.size() != c.size()) throw std::invalid_argument("dissipated_energy: mismatched series");
  return (c.derived() * v.derived().square()).sum() * dt;
}

// Smallest tau such that the relative deviation stays below band for hold
// seconds starting at tau. The series starts at the disturbance onset.
// Missing when tau would exceed horizon or the series ends first.
std::optional<double> return_time(const Eigen::ArrayXd& rel_deviation, double dt, double band = 0.10,
                                  double hold = 0.2, double horizon = 3.0);

// Same, from an energy series and its baseline (scalar or per-sample).
std::optional<double> return_time(const Eigen::ArrayXd& energy, const Eigen::ArrayXd& baseline, double dt,
                                  double band = 0.10, double hold = 0.2, double horizon = 3.0);

// Fraction of entries with |deviation| < band; needs at least min_cycles.
double stability_rate(const Eigen::ArrayXd& rel_deviation, double band = 0.10, Eigen::Index min_cycles = 50);

struct SpectralReport {
  Eigen::ArrayXd freqs;
  Eigen::ArrayXd psd;  // one-sided, units^2 / Hz
  double band_low = 0.0;   // f < 20 Hz
  double band_high = 0.0;  // 30 Hz .. Nyquist
  double total = 0.0;
};

// Averaged periodogram: 1 s Hann segments, 50% overlap, per-segment mean
// removed. Requires at least 2 s of samples.
SpectralReport spectral_bands(const Eigen::ArrayXd& series, double sample_rate, double low_edge = 20.0,
                              double high_edge = 30.0);

// Surrogate with the same amplitude spectrum and uniformly random phases.
Eigen::ArrayXd phase_randomize(const Eigen::ArrayXd& series, Stream& rng);

// Lag (in samples) maximizing the Pearson correlation of a[t] with b[t - lag]
// over the overlapping span; positive means a trails b.
int xcorr_lag(const Eigen::ArrayXd& a, const Eigen::ArrayXd& b, int max_lag);

// Phase of the DFT component completing `cycles` periods over the window.
double fundamental_phase(const Eigen::ArrayXd& series, int cycles = 1);

Eigen::ArrayXcd amplitude_spectrum(const Eigen::ArrayXd& series);

}  // namespace rehab
