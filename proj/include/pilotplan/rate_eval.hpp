// Copyright 2026 pilotplan developers.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pilotplan/channel_mc.hpp"
#include "pilotplan/hexlattice.hpp"

namespace pilotplan {

struct PilotVector;  // pilot_opt.hpp

/// Per-cell sum rate: sum_i 3^-i * leaves[i] * C_i.
double sum_rate(const PilotVector& p, const DepthRateTable& rates);

/// Per-cell net rate: the sum rate discounted by the pilot share of the
/// coherence interval, (n_coh - pilot_count)/n_coh. May be <= 0 when pilots
/// fill or exceed the interval.
double net_rate(const PilotVector& p, double n_coh,
                const DepthRateTable& rates);

/// Per-user net rate at coherence interval K*ncoh_over_k. Arranged so the
/// user count cancels exactly for one-hot vectors (K*3^i leaves at one
/// depth): such curves are bit-identical for every K.
double net_rate_per_user(const PilotVector& p, long long ncoh_over_k,
                         const DepthRateTable& rates);

/// N_coh/K ratio above which splitting the network into three pilot groups
/// beats full reuse, for a single dominant interferer at the given linear
/// SIR: 3 + log2(sir)/gamma.
double reuse3_crossover_ratio(double sir_linear, double gamma);

/// Monte Carlo net rate of the random baseline: every cell independently
/// assigns its K users K distinct pilots drawn uniformly from n_pil, and a
/// user's rate is evaluated against its dominant interferer, the same-pilot
/// user of the nearest other cell (matching the per-depth rate estimator).
/// Users with no same-pilot interferer anywhere would have an unbounded rate
/// limit, so every per-user rate is capped at the rate against a single
/// interferer placed at the torus diameter with unit shadow;
/// cap_hit_fraction reports how often the cap engaged.
struct RandomAssignmentEstimate {
  double net_rate = 0.0;
  double cap_hit_fraction = 0.0;
};

RandomAssignmentEstimate random_assignment_net_rate(
    int n_pil, long long n_coh, int users_per_cell,
    const TorusLattice& lattice, const FadingParams& params,
    std::int64_t trials, std::uint64_t seed, int workers = 0);

enum class Scheme { optimal, full_reuse, random };
enum class CurveValue { net, net_per_user, net_over_ncoh };

std::string to_string(Scheme s);
std::string to_string(CurveValue v);
Scheme scheme_from_string(const std::string& name);
CurveValue curve_value_from_string(const std::string& name);

struct CurvePoint {
  double x = 0.0;        // n_coh, or n_coh/K for the per-user semantics
  double value = 0.0;
  int n_pil = 0;
  double cap_hit_fraction = 0.0;  // random scheme only
};

struct NetRateCurve {
  Scheme scheme = Scheme::optimal;
  CurveValue value_semantics = CurveValue::net;
  int users_per_cell = 1;
  std::vector<CurvePoint> points;
};

struct CurveMcConfig {
  std::int64_t trials = 400;
  std::uint64_t seed = 1;
  int workers = 0;
};

/// One point per grid coherence interval. The optimal scheme is the
/// enumeration argmax; full reuse is the one-hot root vector; the random
/// scheme matches the optimal scheme's pilot count point by point.
NetRateCurve build_curve(Scheme scheme, CurveValue semantics,
                         std::span<const long long> ncoh_grid,
                         int users_per_cell, const DepthRateTable& rates,
                         const TorusLattice& lattice,
                         const FadingParams& params,
                         const CurveMcConfig& mc = {});

/// CSV: scheme,K,x_semantics,x,value,npil
void write_curve_csv(const NetRateCurve& curve, std::ostream& out);

}  // namespace pilotplan
