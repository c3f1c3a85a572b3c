#include <doctest.h>

#include <Eigen/Core>
#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "rehab/metrics.hpp"

using namespace rehab;

namespace {
constexpr double kPi = std::numbers::pi;

Eigen::ArrayXd white(long n, std::uint64_t seed, const char* name) {
  Stream rng(seed, name);
  Eigen::ArrayXd s(n);
  for (long i = 0; i < n; ++i) s(i) = rng.normal();
  return s;
}
}  // namespace

TEST_CASE("correlation") {
  const auto v = white(1000, 1, "v");
  const Eigen::ArrayXd f = 3.0 * v;
  CHECK(*force_velocity_correlation(f, v) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(oracle::proportional_r_error(2) < 1e-12);
  const auto a = white(10000, 3, "a"), b = white(10000, 3, "b");
  CHECK(std::abs(*force_velocity_correlation(a, b)) < 0.05);
  const Eigen::ArrayXd flat = Eigen::ArrayXd::Constant(100, 2.0);
  CHECK_FALSE(force_velocity_correlation(flat, v.head(100)).has_value());
  // positive affine invariance
  const Eigen::ArrayXd g = white(500, 4, "g");
  const Eigen::ArrayXd h = white(500, 4, "h") + 0.5 * g;
  const double r0 = *force_velocity_correlation(g, h);
  for (double s : {0.01, 2.0, 1e4}) {
    const Eigen::ArrayXd gs = s * g + 7.0;
    CHECK(*force_velocity_correlation(gs, h) == doctest::Approx(r0).epsilon(1e-12));
  }
}

TEST_CASE("moment variance") {
  const Eigen::ArrayXd u0 = Eigen::ArrayXd::Constant(200, 4.0);
  CHECK(moment_variance(u0, 0.15) == doctest::Approx(0.0).epsilon(1e-15));
  const int n = 12000;
  Eigen::ArrayXd u(n);
  const double U = 6.0, L = 0.15;
  for (int i = 0; i < n; ++i) u(i) = U * std::sin(2.0 * kPi * i / 240.0);
  CHECK(moment_variance(u, L) == doctest::Approx(U * U * L * L / 2.0).epsilon(1e-9));
  const double base = moment_variance(u, 1.0);
  for (double lever : {0.1, 0.15, 0.4}) CHECK(moment_variance(u, lever) == doctest::Approx(base * lever * lever));
  CHECK_THROWS(moment_variance(u, 0.0));
}

TEST_CASE("trajectory error") {
  const auto x = white(100, 5, "x");
  CHECK(trajectory_rms(x, x) == 0.0);
  const Eigen::ArrayXd shifted = x + 0.002;
  CHECK(trajectory_rms(shifted, x) == doctest::Approx(0.002));
}

TEST_CASE("dissipated energy") {
  const Eigen::ArrayXd zero = Eigen::ArrayXd::Zero(240);
  const Eigen::ArrayXd c = Eigen::ArrayXd::Constant(240, 20.0);
  CHECK(dissipated_energy(zero, c, 1.0 / 120) == 0.0);
  const double V = 0.06, T = 2.0;
  Eigen::ArrayXd v(240);
  for (int i = 0; i < 240; ++i) v(i) = V * std::sin(2.0 * kPi * i / 240.0);
  CHECK(dissipated_energy(v, c, T / 240) == doctest::Approx(20.0 * V * V * T / 2.0).epsilon(1e-12));
  CHECK(dissipated_energy(white(240, 6, "v"), c, 0.01) >= 0.0);
}

TEST_CASE("return time") {
  const double dt = 1.0 / 120;
  Eigen::ArrayXd quiet = Eigen::ArrayXd::Constant(600, 0.05);
  CHECK(*return_time(quiet, dt) == 0.0);

  for (double te : {0.05, 0.12, 0.3}) {
    for (double a0 : {0.5, 2.0}) {
      Eigen::ArrayXd rel(600);
      for (int i = 0; i < 600; ++i) rel(i) = a0 * std::exp(-i * dt / te);
      const double exact = te * std::log(a0 / 0.10);
      CHECK(std::abs(*return_time(rel, dt) - exact) <= dt);
    }
  }
  Eigen::ArrayXd stuck = Eigen::ArrayXd::Constant(600, 0.5);
  CHECK_FALSE(return_time(stuck, dt).has_value());

  // energy form: scale invariance
  Eigen::ArrayXd energy(600), base = Eigen::ArrayXd::Constant(600, 1.3);
  for (int i = 0; i < 600; ++i) energy(i) = 1.3 * (1.0 + 0.8 * std::exp(-i * dt / 0.1) * std::cos(i * dt * 40.0));
  const auto t1 = return_time(energy, base, dt);
  const Eigen::ArrayXd e2 = 7.5 * energy, b2 = 7.5 * base;
  REQUIRE(t1.has_value());
  CHECK(*return_time(e2, b2, dt) == *t1);
}

TEST_CASE("stability rate") {
  CHECK(stability_rate(Eigen::ArrayXd::Constant(60, 0.01)) == 1.0);
  Eigen::ArrayXd half(100);
  for (int i = 0; i < 100; ++i) half(i) = i % 2 ? 0.05 : -0.3;
  CHECK(stability_rate(half) == 0.5);
  Eigen::ArrayXd e(100), b = Eigen::ArrayXd::Constant(100, 2.0);
  for (int i = 0; i < 100; ++i) e(i) = 2.0 * (1.0 + half(i));
  const Eigen::ArrayXd rel = (e - b) / b, rel_scaled = (5.0 * e - 5.0 * b) / (5.0 * b);
  CHECK(stability_rate(rel) == stability_rate(rel_scaled));
  CHECK_THROWS(stability_rate(Eigen::ArrayXd::Zero(10)));
}

TEST_CASE("spectral bands") {
  const double fs = 1000.0;
  Eigen::ArrayXd tone(10000);
  for (int i = 0; i < tone.size(); ++i) tone(i) = std::sin(2.0 * kPi * 10.0 * i / fs);
  const auto rep = spectral_bands(tone, fs);
  Eigen::Index peak;
  rep.psd.maxCoeff(&peak);
  CHECK(rep.freqs(peak) == doctest::Approx(10.0));
  CHECK(rep.band_low / rep.total > 0.95);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) CHECK(std::abs(oracle::parseval_ratio(seed) - 1.0) < 0.05);
  CHECK_THROWS(spectral_bands(tone.head(1500), fs));
}

TEST_CASE("phase randomization keeps the amplitude spectrum") {
  Stream rng(7, "surrogate");
  Eigen::ArrayXd s(512);
  for (int i = 0; i < 512; ++i) s(i) = std::sin(2.0 * kPi * 5.0 * i / 512.0) + 0.3 * std::cos(2.0 * kPi * 17.0 * i / 512.0);
  const auto sur = phase_randomize(s, rng);
  const auto a = amplitude_spectrum(s), b = amplitude_spectrum(sur);
  for (Eigen::Index k = 0; k < a.size(); ++k) CHECK(std::abs(b(k)) == doctest::Approx(std::abs(a(k))).epsilon(1e-9));
  CHECK((sur - s).abs().maxCoeff() > 0.1);
}

TEST_CASE("lag and phase helpers") {
  Eigen::ArrayXd v(240), f(240);
  for (int i = 0; i < 240; ++i) {
    v(i) = std::sin(2.0 * kPi * i / 240.0) + 0.2 * std::sin(2.0 * kPi * 7.0 * i / 240.0);
    f(i) = std::sin(2.0 * kPi * (i - 3) / 240.0) + 0.2 * std::sin(2.0 * kPi * 7.0 * (i - 3) / 240.0);
  }
  CHECK(xcorr_lag(f, v, 120) == 3);
  CHECK(xcorr_lag(v, f, 120) == -3);
  Eigen::ArrayXd c(240);
  for (int i = 0; i < 240; ++i) c(i) = std::cos(2.0 * kPi * i / 240.0 + 0.4);
  CHECK(fundamental_phase(c) == doctest::Approx(0.4).epsilon(1e-9));
}
