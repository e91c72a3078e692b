//===- rng.hpp - Deterministic seeded random draws --------------*- C++ -*-===//
//
// Part of the Loft Project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// Thin wrapper over std::mt19937_64 that avoids std::uniform_int_distribution
// (whose output is implementation-defined) so every table and fixture is
// byte-stable across standard libraries and platforms.
//
//===----------------------------------------------------------------------===//

#ifndef LOFT_RNG_HPP
#define LOFT_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace loft {

/// splitmix64 finalizer; used to fold row keys into a base seed.
inline uint64_t mix_seed(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline uint64_t mix_seed(uint64_t seed, uint64_t key) {
  return mix_seed(seed ^ mix_seed(key));
}

inline uint64_t mix_seed(uint64_t seed, std::string_view key) {
  uint64_t h = 0xcbf29ce484222325ull; // FNV-1a 64
  for (unsigned char c : key)
    h = (h ^ c) * 0x100000001b3ull;
  return mix_seed(seed, h);
}

class Rng {
public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  /// Uniform draw in [0, n); n must be positive. Uses rejection-free modulo;
  /// bias is irrelevant for test-input generation and keeps draws portable.
  uint64_t below(uint64_t n) { return gen_() % n; }

  /// Inclusive range [lo, hi].
  int64_t range(int64_t lo, int64_t hi) {
    return lo + static_cast<int64_t>(below(static_cast<uint64_t>(hi - lo + 1)));
  }

  /// Full-range int32, all bit patterns equally likely.
  int32_t next_i32() { return static_cast<int32_t>(static_cast<uint32_t>(gen_())); }

  bool chance(uint64_t num, uint64_t den) { return below(den) < num; }

  uint64_t raw() { return gen_(); }

private:
  std::mt19937_64 gen_;
};

} // namespace loft

#endif // LOFT_RNG_HPP
