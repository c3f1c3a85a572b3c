#include "rehab/rng.hpp"

#include <cmath>
#include <numbers>

namespace rehab {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Stream::Stream(std::uint64_t seed, std::string_view name)
    : key_(splitmix64(splitmix64(seed) ^ fnv1a64(name))) {}

std::uint64_t Stream::bits_at(std::uint64_t counter) const {
  // two rounds so that adjacent counters decorrelate fully
  return splitmix64(splitmix64(key_ ^ (counter * 0xd1342543de82ef95ULL)) + key_);
}

double Stream::uniform_at(std::uint64_t counter) const {
  return (static_cast<double>(bits_at(counter) >> 11) + 0.5) * 0x1.0p-53;
}

double Stream::normal_at(std::uint64_t counter) const {
  // separate lane from uniform_at so mixed use of a stream never reuses a slot
  const std::uint64_t base = (counter << 1) | (1ULL << 63);
  const double u1 = uniform_at(base);
  const double u2 = uniform_at(base + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Stream::normal() {
  const double z = normal_at(counter_);
  ++counter_;
  return z;
}

double Stream::exponential(double rate) { return -std::log(uniform()) / rate; }

}  // namespace rehab
