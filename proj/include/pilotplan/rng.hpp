// Copyright 2026 pilotplan developers.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>

namespace pilotplan {

/// Counter-derived random substream. Every (seed, domain, major, minor) tuple
/// names an independent stream, so Monte Carlo trials can be sharded across
/// any number of workers and still reproduce bit-identically; the generator
/// itself is splitmix64, with uniform and normal draws built from explicit
/// bit manipulation rather than std::distributions so sequences do not depend
/// on the standard library implementation.
class SubstreamRng {
 public:
  SubstreamRng(std::uint64_t seed, std::uint64_t domain, std::uint64_t major,
               std::uint64_t minor) {
    state_ = mix(seed + 0x9e3779b97f4a7c15ull * (domain + 1));
    state_ = mix(state_ ^ mix(major + 0x517cc1b727220a95ull));
    state_ = mix(state_ ^ mix(minor + 0x2545f4914f6cdd1dull));
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller (cosine branch only, stateless).
  double next_normal() {
    // next_unit() can return 0; flip to (0,1] for the log.
    const double u1 = 1.0 - next_unit();
    const double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586476925286766559 * u2);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_ = 0;
};

/// Stream domains, so different estimators never share a substream even when
/// run with the same master seed.
enum class RngDomain : std::uint64_t {
  depth_rates = 1,
  random_assignment = 2,
};

}  // namespace pilotplan
