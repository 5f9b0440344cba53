// Copyright 2026 The BlackSpectrum Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string_view>

namespace blackspectrum {

// splitmix64 step. Standard-library distributions are not bit-identical
// across platforms, so everything that must be reproducible (the simulator,
// demo data generation) draws from this instead.
inline uint64_t splitmix64_next(uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stateless splitmix64 finalizer, used to spread hash values over buckets.
inline uint64_t mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline uint64_t mix_seed(uint64_t a, uint64_t b) {
  uint64_t state = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  return splitmix64_next(state);
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() { return splitmix64_next(state_); }

  // Uniform in [0, 1), 53 bits of precision.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [0, n). Modulo bias is negligible for the small n used here.
  uint64_t next_index(uint64_t n) { return next_u64() % n; }

  // Uniform integer in [lo, hi], inclusive.
  int next_int(int lo, int hi) {
    return lo + static_cast<int>(next_index(static_cast<uint64_t>(hi - lo + 1)));
  }

  bool bernoulli(double p) { return next_double() < p; }

 private:
  uint64_t state_;
};

}  // namespace blackspectrum
