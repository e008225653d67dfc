// Copyright 2026 pilotplan developers.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace pilotplan {

struct PropertyResult {
  std::string name;
  bool passed = false;
  std::string detail;  // first failure, or a short summary when passed
};

/// Runs every structural and numerical property suite over 9- and 81-cell
/// networks with 1..3 users per cell: transition-space round trips and
/// bounds, closed-form optimizers against the enumeration oracle, breakpoint
/// algebra against numerically solved curve intersections, assignment
/// consistency over dense coherence sweeps, realization validity, lattice
/// partition/spacing/homogeneity, rate-objective identities, and Monte Carlo
/// determinism. Randomized checks derive from `seed`.
std::vector<PropertyResult> run_verification(std::uint64_t seed);

bool all_passed(const std::vector<PropertyResult>& results);

void write_verify_json(const std::vector<PropertyResult>& results,
                       std::uint64_t seed, std::ostream& out);

}  // namespace pilotplan
