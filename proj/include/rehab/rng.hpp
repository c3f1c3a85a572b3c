#pragma once

#include <cstdint>
#include <string_view>

namespace rehab {

std::uint64_t splitmix64(std::uint64_t x);

// FNV-1a, used to key named streams and to hash configs.
std::uint64_t fnv1a64(std::string_view text);

// Counter-based generator: the n-th draw of a stream is a pure function of
// (seed, name, n), so streams never interfere and draws can be addressed
// directly. Normals use our own Box-Muller so results do not depend on the
// standard library's distribution implementations.
class Stream {
 public:
  Stream() = default;
  Stream(std::uint64_t seed, std::string_view name);

  std::uint64_t bits_at(std::uint64_t counter) const;
  double uniform_at(std::uint64_t counter) const;  // in (0, 1)
  double normal_at(std::uint64_t counter) const;   // N(0, 1)

  std::uint64_t next_bits() { return bits_at(counter_++); }
  double uniform() { return uniform_at(counter_++); }
  double normal();
  double exponential(double rate);
  int sign() { return (next_bits() >> 63) ? 1 : -1; }

  std::uint64_t counter() const { return counter_; }
  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace rehab
