// Copyright 2026 pilotplan developers.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pilotplan/channel_mc.hpp"
#include "pilotplan/hexlattice.hpp"

namespace pilotplan {

/// A pilot assignment strategy over the partition tree: leaves[i] is the
/// number of pilots that are reused exactly within depth-i cosets. A vector
/// is valid when every entry fits its level (0 <= leaves[i] <= K*3^i) and the
/// leaves tile the tree: sum_i leaves[i] * 3^-i == K, checked in exact
/// integer arithmetic.
struct PilotVector {
  std::vector<int> leaves;
  int users_per_cell = 1;

  int depth_count() const { return static_cast<int>(leaves.size()); }
  long long cell_count() const;
  /// Number of orthogonal pilots the strategy consumes: sum of entries.
  int pilot_count() const;
  bool is_valid() const;

  /// Text form "(0,2,3,0)", used in CSV/JSON outputs and CLI arguments.
  std::string to_string() const;
  static PilotVector parse(const std::string& text, int users_per_cell);

  bool operator==(const PilotVector&) const = default;
};

/// Equivalent coordinates for a pilot vector: splits[i] counts the 3-way
/// partitionings applied at depth i when growing the tree from full reuse.
struct TransitionVector {
  std::vector<int> splits;
  int users_per_cell = 1;

  bool operator==(const TransitionVector&) const = default;
};

/// All pilot counts achievable by valid vectors: {K, K+2, ..., K*3^(m-1)}.
std::vector<int> valid_lengths(int depth_count, int users_per_cell);

/// Exact round-trip pair. Both throw std::invalid_argument on invalid input.
TransitionVector to_transition(const PilotVector& p);
PilotVector from_transition(const TransitionVector& t);

/// First depth that carries leaves in the sum-rate-optimal vector for this
/// pilot count: min{k : sum_{i<=k} K*3^i > (pilot_count-K)/2}.
int first_leaf_depth(int pilot_count, int depth_count, int users_per_cell);

/// Closed-form maximizer of the per-cell sum rate among all valid vectors
/// with the given pilot count. Nonzero only at first_leaf_depth and the next
/// depth; exact for any rate table whose weighted increments 3^-i *
/// (C_{i+1}-C_i) are strictly decreasing (near-linear tables always qualify).
PilotVector sum_rate_optimal(int pilot_count, int depth_count,
                             int users_per_cell);

/// Steps the sum-rate optimum from its pilot count N to N+2: one leaf moves
/// from the first nonzero depth to three leaves one level down. Input must be
/// a sum_rate_optimal output below the maximum pilot count.
PilotVector next_length_step(const PilotVector& optimal);

/// Every valid vector exactly once, generated through transition-space
/// recursion. Supported up to depth_count 4 (81 cells). Optionally filtered
/// to a single pilot count.
std::vector<PilotVector> enumerate_vectors(
    int depth_count, int users_per_cell,
    std::optional<int> pilot_count_filter = std::nullopt);

/// Concrete schedule witnessing that a valid vector can be realized: every
/// cell gets exactly K distinct pilots, and a pilot created at depth d is
/// used once per cell by exactly the cells of one depth-d coset.
struct PilotRealization {
  std::vector<std::vector<int>> cell_slots;  // [cell] -> pilot ids, ascending
  std::vector<CosetId> pilot_cosets;         // [pilot id] -> owning coset
  int pilot_count() const { return static_cast<int>(pilot_cosets.size()); }
};

/// Greedy hierarchical token allocation: K tokens start at the root; at depth
/// i, leaves[i] tokens (on the lexicographically first eligible cosets)
/// become pilots and the rest split into the three child cosets.
PilotRealization realize(const PilotVector& p, const TorusLattice& lattice);

/// Coherence-interval thresholds at which the optimal pilot count steps from
/// one valid length to the next. Stored in N_coh/K units (equal to N_coh for
/// K=1); entry n-1 holds the threshold between lengths 2n+K-2 and 2n+K.
struct BreakpointTable {
  std::vector<double> ratios;
  int users_per_cell = 1;
  int depth_count = 0;

  int count() const { return static_cast<int>(ratios.size()); }
  /// Index n such that ratios[n-1] <= x < ratios[n] (half-open; a value
  /// exactly at a threshold selects the longer pilot). n=0 below all.
  int interval_index(double ncoh_over_k) const;
  int pilot_length_for(double n_coh) const;
};

/// Closed-form thresholds from the rate table. Throws std::domain_error if
/// the rates are not strictly increasing, or if the resulting thresholds are
/// not (which signals a table too far from linear for the interval search).
BreakpointTable compute_breakpoints(const DepthRateTable& rates,
                                    int users_per_cell);

/// Net-rate-optimal assignment for a coherence interval, via the breakpoint
/// table (requires n_coh >= users_per_cell; at n_coh == K the answer is full
/// reuse with zero net rate).
PilotVector optimal_assignment(long long n_coh, const DepthRateTable& rates,
                               int users_per_cell);

/// Enumeration oracles: exhaustive argmax of the sum rate within one pilot
/// count, and of the net rate over all valid vectors. Ties break toward the
/// lexicographically smallest vector.
PilotVector brute_force_sum_optimal(int pilot_count,
                                    const DepthRateTable& rates,
                                    int users_per_cell);
PilotVector brute_force_net_optimal(long long n_coh,
                                    const DepthRateTable& rates,
                                    int users_per_cell);

/// Both routes at once, for reporting: the closed-form route vector, the
/// enumeration argmax, and whether they achieve the same net rate.
struct CheckedAssignment {
  PilotVector closed_form;
  PilotVector brute_force;
  bool net_rates_match = false;
};
CheckedAssignment optimal_assignment_checked(long long n_coh,
                                             const DepthRateTable& rates,
                                             int users_per_cell);

}  // namespace pilotplan
