// Copyright 2026 pilotplan developers.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pilotplan/hexlattice.hpp"
#include "pilotplan/rng.hpp"

namespace pilotplan {

/// Slow-fading model parameters: distance decay exponent, log-normal shadowing
/// spread, and the cell geometry users are drawn from.
struct FadingParams {
  double gamma = 3.8;
  double shadow_sigma_db = 8.0;
  double cell_radius_m = 1600.0;
  double hole_radius_m = 100.0;

  void validate() const;
};

/// Estimated per-depth user rates C_d with Monte Carlo uncertainty. Entry d is
/// the mean rate of a user whose pilot is reused only within a depth-d coset.
struct DepthRateTable {
  std::vector<double> rates;    // bits/s/Hz, one per depth 0..m-1
  std::vector<double> stderrs;  // standard error of each mean
  std::int64_t trials = 0;
  std::uint64_t seed = 0;
  FadingParams params;

  int depth_count() const { return static_cast<int>(rates.size()); }
  bool strictly_increasing() const;
  /// Max over depths of |linear fit - rate| / rate, for the fit of rate vs
  /// depth; small values mean the table is close to linear.
  double max_linear_fit_residual() const;
};

/// Shadow fading factor z = 10^(X/10), X ~ N(0, sigma_db^2).
double shadow_draw(SubstreamRng& rng, double shadow_sigma_db);

/// beta = z / distance^gamma. Throws std::domain_error for distance <= 0.
double slow_fade(double distance_m, double z, const FadingParams& params);

/// Infinite-antenna rate limit log2(1 + beta_own^2 / sum beta_l^2). The
/// interferer list must be non-empty (a contamination-free user has unbounded
/// limit rate and is excluded from the model).
double asymptotic_rate(double beta_own, std::span<const double> beta_interferers);

/// Uniform position in the cell hexagon (circumradius = cell radius) centered
/// on `cell_index`, excluding the hole disk around the base station at the
/// center. Rejection sampling; the hole is strictly inside the hexagon so
/// acceptance is bounded away from zero.
Vec2 draw_position(const TorusLattice& lattice, int cell_index,
                   SubstreamRng& rng, const FadingParams& params);

/// One Monte Carlo draw for the depth-rate estimator, split out so tests can
/// pin positions and shadow factors.
struct TrialDraw {
  Vec2 user_pos;
  double user_shadow = 1.0;
  std::vector<Vec2> interferer_pos;
  std::vector<double> interferer_shadow;  // same order
};

/// Draws the desired user plus the dominant interferer: one co-pilot user
/// placed uniformly in one of the nearest co-pilot cells at this depth. All
/// links carry independent shadow factors. The nearest co-pilot cell is a
/// factor sqrt(3) farther per depth, which is what makes the per-depth rate
/// growth approximately gamma*log2(3).
TrialDraw draw_depth_trial(const TorusLattice& lattice, int reference_cell,
                           int depth, const FadingParams& params,
                           SubstreamRng& rng);

/// Rate of the drawn configuration against the base station at the center of
/// `reference_cell`; purely deterministic given the draw.
double rate_for_draw(const TorusLattice& lattice, int reference_cell,
                     const TrialDraw& draw, const FadingParams& params);

/// Monte Carlo estimate of C_0..C_{m-1}: the mean rate of a uniformly placed
/// user against its dominant co-pilot interferer, per depth. Each
/// (depth, trial) pair uses its own counter-derived substream, so results
/// are bit-identical for any worker count.
DepthRateTable estimate_depth_rates(const TorusLattice& lattice,
                                    const FadingParams& params,
                                    std::int64_t trials, std::uint64_t seed,
                                    int workers = 0);

/// Provenance signature used as the cache key for rate tables.
std::string rate_table_key(int exponent, const FadingParams& params,
                           std::int64_t trials, std::uint64_t seed);

/// CSV: one comment line with the key, then depth,rate_bits,stderr,trials,seed.
void write_rate_table_csv(const DepthRateTable& table, int exponent,
                          std::ostream& out);

/// Parses write_rate_table_csv output. Throws std::runtime_error on malformed
/// input. The embedded key is returned via *key if non-null.
DepthRateTable read_rate_table_csv(std::istream& in, std::string* key = nullptr);

}  // namespace pilotplan
