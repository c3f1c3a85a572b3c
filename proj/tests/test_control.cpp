#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rehab/control.hpp"
#include "rehab/rng.hpp"

using namespace rehab;

TEST_CASE("presets") {
  const auto r = ControlPreset::rigid();
  CHECK(r.params.k == 10000.0);
  CHECK(r.params.c == 40.0);
  const auto s = ControlPreset::soft();
  CHECK(s.params.k == 2000.0);
  CHECK(s.params.c == 20.0);
  const auto a = ControlPreset::adaptive(5000.0, 20.0);
  CHECK(a.params.k_min == 3000.0);
  CHECK(a.params.k_max == 8000.0);
  CHECK(a.params.c_min == 10.0);
  CHECK(a.params.c_max == 40.0);
  CHECK_THROWS(ControlPreset::adaptive(9000.0, 20.0));
  CHECK(parse_preset("soft") == PresetKind::Soft);
  CHECK_THROWS(parse_preset("floppy"));
}

TEST_CASE("reference trajectory") {
  ReferenceTrajectory traj;
  traj.offset = 0.003;
  const auto r0 = reference(0.0, traj);
  CHECK(r0.x == doctest::Approx(0.003));
  CHECK(r0.v == doctest::Approx(2.0 * std::numbers::pi * 0.5 * 0.02));
  traj.offset = 0.0;
  double peak = 0.0;
  for (double t = 0.0; t < 2.0; t += 1e-4) peak = std::max(peak, std::abs(reference(t, traj).v));
  CHECK(peak == doctest::Approx(0.0628).epsilon(1e-3));
  for (double t : {0.3, 1.1, 7.9}) CHECK(reference(t + 2.0, traj).x == doctest::Approx(reference(t, traj).x));
  const double h = 1e-6;
  for (double t : {0.2, 0.9, 1.7})
    CHECK(reference(t, traj).v ==
          doctest::Approx((reference(t + h, traj).x - reference(t - h, traj).x) / (2 * h)).epsilon(1e-6));
}

TEST_CASE("impedance law") {
  ImpedanceParams p;
  p.k = 5000.0;
  p.c = 20.0;
  CHECK(impedance_force(0.01, 0.1, {0.01, 0.1}, p) == 0.0);
  CHECK(impedance_force(0.002, 0.0, {0.0, 0.0}, p) == doctest::Approx(-10.0));
  CHECK(impedance_force(0.0, 0.05, {0.0, 0.0}, p) == doctest::Approx(-1.0));
}

TEST_CASE("spring-damper law never injects power when moving away") {
  Stream rng(11, "passivity");
  ImpedanceParams p;
  for (int i = 0; i < 5000; ++i) {
    p.k = 3000.0 + 5000.0 * rng.uniform();
    p.c = 10.0 + 30.0 * rng.uniform();
    const double x = 0.05 * (rng.uniform() - 0.5), v = 0.5 * (rng.uniform() - 0.5);
    const double u = impedance_force(x, v, {0.0, 0.0}, p);
    if (x * v >= 0.0) CHECK(u * v <= 0.0);
  }
}

TEST_CASE("parameter updates") {
  ImpedanceController ctl(ControlPreset::adaptive(5000.0, 20.0));
  CHECK(ctl.apply_params(6000.0, 25.0));
  CHECK(ctl.params().k == 6000.0);
  CHECK(ctl.params().c == 25.0);
  CHECK(ctl.clamp_count() == 0);
  ctl.apply_params(9000.0, 25.0);
  CHECK(ctl.params().k == 8000.0);
  CHECK(ctl.clamp_count() == 1);
  ctl.apply_params(1000.0, 50.0);
  CHECK(ctl.params().k == 3000.0);
  CHECK(ctl.params().c == 40.0);
  CHECK(ctl.clamp_count() == 2);

  ImpedanceController rigid(ControlPreset::rigid());
  CHECK_FALSE(rigid.apply_params(5000.0, 20.0));
  CHECK(rigid.params().k == 10000.0);
  CHECK(rigid.rejected_count() == 1);
}

TEST_CASE("invalid observations hold the last command") {
  ImpedanceController ctl(ControlPreset::adaptive(5000.0, 20.0));
  FusedObservation obs;
  obs.valid = true;
  obs.position = 0.002;
  obs.velocity_est = 0.0;
  CHECK(ctl.command(obs, {0.0, 0.0}) == doctest::Approx(-10.0));
  FusedObservation stale;
  CHECK(ctl.command(stale, {0.0, 0.0}) == doctest::Approx(-10.0));
}

TEST_CASE("optional saturation") {
  ImpedanceController ctl(ControlPreset::rigid(), 60.0);
  CHECK(ctl.command(0.1, 0.0, {0.0, 0.0}) == -60.0);
  ImpedanceController open(ControlPreset::rigid());
  CHECK(open.command(0.1, 0.0, {0.0, 0.0}) == doctest::Approx(-1000.0));
}
