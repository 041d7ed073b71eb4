#pragma once

#include <cstdint>

#include "qwloc/types.hpp"

namespace qwloc {

// Counter-based randomness: every draw is a pure function of a 64-bit
// key, so disorder fields can be evaluated at any lattice site in any
// order (or in parallel) and always reproduce the same values.

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
  return mix64(h ^ mix64(v));
}

// Key for the phase attached to lattice state (site, tau).
inline std::uint64_t state_key(std::uint64_t seed, const Site& site, int d, int tau) {
  std::uint64_t h = mix64(seed);
  for (int i = 0; i < d; ++i) {
    h = hash_combine(h, static_cast<std::uint64_t>(static_cast<std::int64_t>(site[i])));
  }
  return hash_combine(h, static_cast<std::uint64_t>(static_cast<std::int64_t>(tau)));
}

// Uniform double in [0, 1) from the top 53 bits.
inline double unit_double(std::uint64_t h) {
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Independent sub-seed for a named stream (realization index, module id, ...).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return hash_combine(mix64(seed ^ 0x6c0ff5e1d4a1c3b7ULL), stream);
}

// Small sequential generator for test data and coin perturbations.
// Deterministic across platforms, unlike std:: distributions.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : key_(mix64(seed)) {}

  std::uint64_t next_u64() { return hash_combine(key_, counter_++); }
  double next_double() { return unit_double(next_u64()); }

  // Standard normal via Box-Muller.
  double next_normal();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace qwloc
