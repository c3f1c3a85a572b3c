#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "rehab/rng.hpp"

using namespace rehab;

TEST_CASE("splitmix64 reference values") {
  // first outputs of the reference generator seeded with 0
  std::uint64_t state = 0;
  auto next = [&] {
    const std::uint64_t out = splitmix64(state);
    state += 0x9e3779b97f4a7c15ULL;
    return out;
  };
  CHECK(next() == 0xe220a8397b1dcdafULL);
  CHECK(next() == 0x6e789e6aa1b965f4ULL);
  CHECK(next() == 0x06c45d188009454fULL);
}

TEST_CASE("fnv1a64 reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("streams are addressable and reproducible") {
  Stream a(7, "patient"), b(7, "patient");
  for (int i = 0; i < 100; ++i) CHECK(a.next_bits() == b.next_bits());
  Stream c(7, "patient");
  CHECK(c.bits_at(42) == Stream(7, "patient").bits_at(42));
  for (int i = 0; i < 42; ++i) c.next_bits();
  CHECK(c.next_bits() == Stream(7, "patient").bits_at(42));
}

TEST_CASE("named streams and seeds are independent") {
  const Stream p(1, "patient"), s(1, "sensors.force"), q(2, "patient");
  CHECK(p.key() != s.key());
  CHECK(p.key() != q.key());
  int same = 0;
  for (std::uint64_t i = 0; i < 1000; ++i) same += p.bits_at(i) == s.bits_at(i);
  CHECK(same == 0);
}

TEST_CASE("adding a consumer does not perturb another stream") {
  Stream force(3, "sensors.force");
  std::vector<double> alone;
  for (int i = 0; i < 50; ++i) alone.push_back(force.normal());
  Stream force2(3, "sensors.force"), imu(3, "sensors.imu");
  for (int i = 0; i < 50; ++i) {
    imu.normal();
    CHECK(force2.normal() == alone[static_cast<std::size_t>(i)]);
  }
}

TEST_CASE("uniform moments") {
  Stream s(11, "test");
  const int n = 200000;
  double sum = 0.0, sq = 0.0, lo = 1.0, hi = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    sum += u;
    sq += u * u;
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo > 0.0);
  CHECK(hi < 1.0);
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(sq / n - (sum / n) * (sum / n) == doctest::Approx(1.0 / 12.0).epsilon(0.02));
}

TEST_CASE("normal moments and lane separation") {
  Stream s(12, "test");
  const int n = 200000;
  double sum = 0.0, sq = 0.0, quart = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = s.normal();
    sum += z;
    sq += z * z;
    quart += z * z * z * z;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(sq / n == doctest::Approx(1.0).epsilon(0.02));
  CHECK(quart / n == doctest::Approx(3.0).epsilon(0.05));
  // normals and uniforms drawn at the same counter do not share bits
  const Stream t(12, "test");
  std::set<std::uint64_t> uni;
  for (std::uint64_t i = 0; i < 64; ++i) uni.insert(t.bits_at(i));
  for (std::uint64_t i = 0; i < 32; ++i) {
    CHECK(uni.count(t.bits_at((i << 1) | (1ULL << 63))) == 0);
  }
}

TEST_CASE("exponential and sign") {
  Stream s(13, "test");
  double sum = 0.0;
  int plus = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    sum += s.exponential(4.0);
    plus += s.sign() > 0;
  }
  CHECK(sum / n == doctest::Approx(0.25).epsilon(0.02));
  CHECK(plus == doctest::Approx(n / 2).epsilon(0.02));
}
