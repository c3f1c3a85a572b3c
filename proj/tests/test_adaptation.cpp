#include <doctest.h>

#include <Eigen/Core>
#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "rehab/adaptation.hpp"

using namespace rehab;

namespace {

AdaptState fresh(double k = 5000.0, double c = 20.0) {
  AdaptState st;
  st.theta_base = ImpedanceParams{k, c, 3000.0, 8000.0, 10.0, 40.0};
  return st;
}

}  // namespace

TEST_CASE("cycle energy") {
  const int n = 241;
  const double T = 2.0, dt = T / (n - 1), w = 2.0 * std::numbers::pi / T, V = 0.06;
  Eigen::ArrayXd v(n), f(n);
  for (int i = 0; i < n; ++i) v(i) = V * std::cos(w * i * dt);
  f.setConstant(3.0);
  CHECK(std::abs(cycle_energy(f, v, dt)) < 1e-12);
  const double c_eq = 20.0;
  f = c_eq * v;
  CHECK(cycle_energy(f, v, dt) == doctest::Approx(c_eq * V * V * T / 2.0).epsilon(1e-9));
  Eigen::ArrayXd empty(0);
  CHECK_THROWS(cycle_energy(empty, empty, dt));
}

TEST_CASE("baseline window") {
  CHECK(baseline({2, 2, 2}, 10) == 2.0);
  CHECK(baseline({1, 2, 3}, 2) == 2.5);
  std::vector<double> h;
  for (int i = 1; i <= 100; ++i) h.push_back(i * i);
  double brute = 0.0;
  for (int i = 91; i <= 100; ++i) brute += i * i;
  CHECK(baseline(h, 10) == doctest::Approx(brute / 10.0));
  CHECK_THROWS(baseline({}, 10));
}

TEST_CASE("perturbation") {
  Stream rng(1, "adaptation");
  AdaptState st = fresh();
  st.delta_k = 0.0;
  st.delta_c = 0.0;
  const auto p0 = perturb(st, rng);
  CHECK(p0.k == 5000.0);
  CHECK(p0.c == 20.0);

  AdaptState top = fresh(8000.0, 40.0);
  for (int i = 0; i < 50; ++i) {
    const auto p = perturb(top, rng);
    if (top.p_k == 1 && top.p_c == 1) {
      CHECK(p.k == 8000.0);
      CHECK(p.c == 40.0);
    }
  }

  int counts[2][2] = {};
  AdaptState u = fresh();
  for (int i = 0; i < 1000; ++i) {
    perturb(u, rng);
    ++counts[(u.p_k + 1) / 2][(u.p_c + 1) / 2];
  }
  for (auto& row : counts)
    for (int n : row) {
      CHECK(n >= 200);
      CHECK(n <= 300);
    }

  AdaptState frozen = fresh();
  frozen.frozen = true;
  Stream a(2, "adaptation"), b(2, "adaptation");
  const auto pf = perturb(frozen, a);
  CHECK(pf.k == 5000.0);
  CHECK(a.next_bits() == b.next_bits());
}

TEST_CASE("update rule") {
  AdaptState st = fresh();
  st.p_k = 1;
  st.p_c = -1;
  const auto down = update(st, 1.0, 2.0);
  CHECK(down.theta_base.k == 5200.0);
  CHECK(down.theta_base.c == 18.0);
  CHECK(down.last_committed);
  CHECK(down.history.back() == 1.0);
  const auto up = update(st, 3.0, 2.0);
  CHECK(up.theta_base.k == 4900.0);
  CHECK(up.theta_base.c == 21.0);
  CHECK_FALSE(up.last_committed);
  st.frozen = true;
  for (double e : {0.1, 5.0}) {
    const auto f = update(st, e, 2.0);
    CHECK(f.theta_base.k == 5000.0);
    CHECK(f.theta_base.c == 20.0);
    CHECK(f.history.size() == 1);
  }
}

TEST_CASE("parameters stay inside the rectangle") {
  Stream rng(3, "fuzz"), draws(3, "adaptation");
  AdaptState st = fresh();
  st.delta_k = 900.0;
  st.delta_c = 9.0;
  st.history.push_back(1.0);
  for (int i = 0; i < 20000; ++i) {
    st.eta = 0.1 + 3.0 * rng.uniform();
    const double base = baseline(st.history, st.window);
    perturb(st, draws);
    st = update(st, 2.0 * rng.uniform(), base);
    REQUIRE(st.theta_base.within_bounds());
  }
}

TEST_CASE("freezing is inert and resumes from the held point") {
  Stream rng(4, "adaptation");
  AdaptState st = fresh();
  st.history.push_back(1.0);
  for (int i = 0; i < 5; ++i) {
    perturb(st, rng);
    st = update(st, 0.5, baseline(st.history, st.window));
  }
  const auto held = st.theta_base;
  st.frozen = true;
  for (int i = 0; i < 30; ++i) {
    const auto p = perturb(st, rng);
    CHECK(p.k == held.k);
    st = update(st, i % 2 ? 0.1 : 9.0, baseline(st.history, st.window));
    CHECK(st.theta_base.k == held.k);
    CHECK(st.theta_base.c == held.c);
  }
  st.frozen = false;
  const auto p = perturb(st, rng);
  CHECK(std::abs(p.k - held.k) == doctest::Approx(st.delta_k));
}

TEST_CASE("sign rule descends a convex bowl") {
  const double minimum = oracle::grid_minimum();
  CHECK(minimum == doctest::Approx(1.0).epsilon(1e-9));
  int reached_count = 0;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const auto trace = oracle::convex_descent(5000.0, 20.0, 60, seed);
    for (std::size_t i = 1; i < trace.running_best.size(); ++i)
      CHECK(trace.running_best[i] <= trace.running_best[i - 1]);
    reached_count += oracle::cycles_to_reach(trace, minimum, 0.10) > 0;
  }
  CHECK(reached_count >= 36);
}
