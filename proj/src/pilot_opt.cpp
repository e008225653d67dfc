// Copyright 2026 pilotplan developers.
// SPDX-License-Identifier: Apache-2.0

#include "pilotplan/pilot_opt.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "pilotplan/rate_eval.hpp"

namespace pilotplan {

namespace {

long long pow3ll(int e) {
  long long v = 1;
  while (e-- > 0) v *= 3;
  return v;
}

void require_valid(const PilotVector& p, const char* what) {
  if (!p.is_valid()) {
    throw std::invalid_argument(std::string(what) +
                                ": pilot vector is not valid: " +
                                p.to_string());
  }
}

// Least index k with sum_{i<=k} K*3^i > target, or depth_count if none.
int prefix_exceeds(long long target, int depth_count, int users_per_cell) {
  long long acc = 0;
  for (int k = 0; k < depth_count; ++k) {
    acc += users_per_cell * pow3ll(k);
    if (acc > target) return k;
  }
  return depth_count;
}

}  // namespace

long long PilotVector::cell_count() const { return pow3ll(depth_count()); }

int PilotVector::pilot_count() const {
  int n = 0;
  for (const int v : leaves) n += v;
  return n;
}

bool PilotVector::is_valid() const {
  const int m = depth_count();
  if (m < 2 || users_per_cell < 1) return false;
  long long weighted = 0;  // sum of leaves[i] * 3^(m-1-i)
  for (int i = 0; i < m; ++i) {
    if (leaves[i] < 0 || leaves[i] > users_per_cell * pow3ll(i)) return false;
    weighted += leaves[i] * pow3ll(m - 1 - i);
  }
  return weighted == users_per_cell * pow3ll(m - 1);
}

std::string PilotVector::to_string() const {
  std::ostringstream out;
  out << '(';
  for (int i = 0; i < depth_count(); ++i) {
    if (i) out << ',';
    out << leaves[i];
  }
  out << ')';
  return out.str();
}

PilotVector PilotVector::parse(const std::string& text, int users_per_cell) {
  std::string body = text;
  if (!body.empty() && body.front() == '(') body.erase(0, 1);
  if (!body.empty() && body.back() == ')') body.pop_back();
  PilotVector p;
  p.users_per_cell = users_per_cell;
  std::istringstream in(body);
  std::string field;
  while (std::getline(in, field, ',')) {
    size_t pos = 0;
    const int v = std::stoi(field, &pos);
    while (pos < field.size() && std::isspace(static_cast<unsigned char>(field[pos]))) ++pos;
    if (pos != field.size()) {
      throw std::invalid_argument("bad pilot vector literal: " + text);
    }
    p.leaves.push_back(v);
  }
  if (p.leaves.size() < 2) {
    throw std::invalid_argument("bad pilot vector literal: " + text);
  }
  return p;
}

std::vector<int> valid_lengths(int depth_count, int users_per_cell) {
  const int max_len =
      static_cast<int>(users_per_cell * pow3ll(depth_count - 1));
  std::vector<int> out;
  for (int n = users_per_cell; n <= max_len; n += 2) out.push_back(n);
  return out;
}

TransitionVector to_transition(const PilotVector& p) {
  require_valid(p, "to_transition");
  const int m = p.depth_count();
  TransitionVector t;
  t.users_per_cell = p.users_per_cell;
  t.splits.resize(m - 1);
  t.splits[0] = p.users_per_cell - p.leaves[0];
  for (int i = 1; i <= m - 2; ++i) {
    t.splits[i] = 3 * t.splits[i - 1] - p.leaves[i];
  }
  return t;
}

PilotVector from_transition(const TransitionVector& t) {
  const int m = static_cast<int>(t.splits.size()) + 1;
  if (m < 2 || t.users_per_cell < 1) {
    throw std::invalid_argument("from_transition: malformed input");
  }
  for (int i = 0; i < m - 1; ++i) {
    const int cap = i == 0 ? t.users_per_cell : 3 * t.splits[i - 1];
    if (t.splits[i] < 0 || t.splits[i] > cap) {
      throw std::invalid_argument("from_transition: split counts out of range");
    }
  }
  PilotVector p;
  p.users_per_cell = t.users_per_cell;
  p.leaves.resize(m);
  p.leaves[0] = t.users_per_cell - t.splits[0];
  for (int i = 1; i <= m - 2; ++i) {
    p.leaves[i] = 3 * t.splits[i - 1] - t.splits[i];
  }
  p.leaves[m - 1] = 3 * t.splits[m - 2];
  require_valid(p, "from_transition");
  return p;
}

int first_leaf_depth(int pilot_count, int depth_count, int users_per_cell) {
  const auto lengths = valid_lengths(depth_count, users_per_cell);
  if (!std::binary_search(lengths.begin(), lengths.end(), pilot_count)) {
    throw std::invalid_argument("pilot count " + std::to_string(pilot_count) +
                                " is not achievable by any valid vector");
  }
  return prefix_exceeds((pilot_count - users_per_cell) / 2, depth_count,
                        users_per_cell);
}

PilotVector sum_rate_optimal(int pilot_count, int depth_count,
                             int users_per_cell) {
  const int chi = first_leaf_depth(pilot_count, depth_count, users_per_cell);
  const long long half = (pilot_count - users_per_cell) / 2;
  long long below = 0;  // sum_{i<chi} K*3^i
  for (int i = 0; i < chi; ++i) below += users_per_cell * pow3ll(i);

  PilotVector p;
  p.users_per_cell = users_per_cell;
  p.leaves.assign(depth_count, 0);
  p.leaves[chi] =
      static_cast<int>(below + users_per_cell * pow3ll(chi) - half);
  if (chi + 1 < depth_count) {
    p.leaves[chi + 1] = static_cast<int>(3 * (half - below));
  }
  require_valid(p, "sum_rate_optimal");
  return p;
}

PilotVector next_length_step(const PilotVector& optimal) {
  require_valid(optimal, "next_length_step");
  const int n = optimal.pilot_count();
  const int m = optimal.depth_count();
  if (optimal != sum_rate_optimal(n, m, optimal.users_per_cell)) {
    throw std::invalid_argument(
        "next_length_step requires a sum-rate-optimal vector");
  }
  if (n >= optimal.users_per_cell * pow3ll(m - 1)) {
    throw std::invalid_argument(
        "next_length_step: already at the maximum pilot count");
  }
  const int chi = first_leaf_depth(n, m, optimal.users_per_cell);
  PilotVector next = optimal;
  next.leaves[chi] -= 1;
  next.leaves[chi + 1] += 3;
  require_valid(next, "next_length_step");
  return next;
}

std::vector<PilotVector> enumerate_vectors(
    int depth_count, int users_per_cell,
    std::optional<int> pilot_count_filter) {
  if (depth_count < 2 || depth_count > 4) {
    throw std::invalid_argument(
        "enumeration is supported for 9..81 cells (depth count 2..4); larger "
        "networks should use the closed-form optimizer");
  }
  if (users_per_cell < 1) {
    throw std::invalid_argument("users per cell must be positive");
  }
  std::vector<PilotVector> out;
  TransitionVector t;
  t.users_per_cell = users_per_cell;
  t.splits.assign(depth_count - 1, 0);
  // Depth-first over split counts; each assignment is one valid vector.
  auto rec = [&](auto&& self, int level) -> void {
    if (level == depth_count - 1) {
      PilotVector p = from_transition(t);
      if (!pilot_count_filter || p.pilot_count() == *pilot_count_filter) {
        out.push_back(std::move(p));
      }
      return;
    }
    const int cap = level == 0 ? users_per_cell : 3 * t.splits[level - 1];
    for (int v = 0; v <= cap; ++v) {
      t.splits[level] = v;
      self(self, level + 1);
    }
    t.splits[level] = 0;
  };
  rec(rec, 0);
  return out;
}

PilotRealization realize(const PilotVector& p, const TorusLattice& lattice) {
  require_valid(p, "realize");
  if (p.depth_count() != lattice.exponent()) {
    throw std::invalid_argument(
        "realize: vector depth count does not match the lattice");
  }
  const int m = p.depth_count();

  PilotRealization r;
  r.cell_slots.assign(lattice.cell_count(), {});

  // tokens[label] = unassigned pilot slots whose subtree is the coset
  // (depth, label). Leafing consumes tokens from the lowest labels first.
  std::vector<long long> tokens{p.users_per_cell};
  for (int depth = 0; depth < m; ++depth) {
    long long need = p.leaves[depth];
    for (size_t label = 0; label < tokens.size() && need > 0; ++label) {
      while (tokens[label] > 0 && need > 0) {
        const CosetId coset{depth, static_cast<int>(label)};
        const int pilot_id = r.pilot_count();
        r.pilot_cosets.push_back(coset);
        for (const int cell : lattice.cells_in_coset(coset)) {
          r.cell_slots[cell].push_back(pilot_id);
        }
        --tokens[label];
        --need;
      }
    }
    if (need > 0) {
      throw std::logic_error("realize: ran out of tokens on a valid vector");
    }
    if (depth + 1 < m) {
      std::vector<long long> next(tokens.size() * 3, 0);
      for (size_t label = 0; label < tokens.size(); ++label) {
        for (int c = 0; c < 3; ++c) next[label * 3 + c] = tokens[label];
      }
      tokens = std::move(next);
    }
  }
  return r;
}

int BreakpointTable::interval_index(double ncoh_over_k) const {
  int n = 0;
  while (n < count() && ratios[n] <= ncoh_over_k) ++n;
  return n;
}

int BreakpointTable::pilot_length_for(double n_coh) const {
  const int n = interval_index(n_coh / users_per_cell);
  return 2 * n + users_per_cell;
}

BreakpointTable compute_breakpoints(const DepthRateTable& rates,
                                    int users_per_cell) {
  if (!rates.strictly_increasing()) {
    throw std::domain_error(
        "breakpoints require strictly increasing per-depth rates");
  }
  const int m = rates.depth_count();
  const int k = users_per_cell;
  if (m < 2 || k < 1) {
    throw std::invalid_argument("breakpoints: malformed inputs");
  }
  BreakpointTable table;
  table.users_per_cell = k;
  table.depth_count = m;
  const long long max_len = k * pow3ll(m - 1);
  const long long n_breaks = (max_len - k) / 2;
  table.ratios.reserve(n_breaks);
  for (long long n = 1; n <= n_breaks; ++n) {
    // Threshold between pilot counts 2n+K-2 and 2n+K.
    const int lower_len = static_cast<int>(2 * n + k - 2);
    const int eta = first_leaf_depth(lower_len, m, k);
    const double xi =
        std::pow(3.0, eta) * rates.rates[eta] /
        (rates.rates[eta + 1] - rates.rates[eta]);
    long long below = 0;
    for (int i = 0; i < eta; ++i) below += k * pow3ll(i);
    // Integer part first, then the rate-dependent term: one rounding fewer
    // than folding xi into the shared numerator.
    const double delta =
        static_cast<double>(2 * (2 * n - 1 - below) + k) / k + 2.0 * xi;
    if (!table.ratios.empty() && !(delta > table.ratios.back())) {
      throw std::domain_error(
          "breakpoints are not strictly increasing: the rate table is too "
          "far from linear for the interval search");
    }
    table.ratios.push_back(delta);
  }
  return table;
}

PilotVector optimal_assignment(long long n_coh, const DepthRateTable& rates,
                               int users_per_cell) {
  if (n_coh < users_per_cell) {
    throw std::invalid_argument(
        "coherence interval is shorter than the minimum pilot");
  }
  const BreakpointTable table = compute_breakpoints(rates, users_per_cell);
  const int length = table.pilot_length_for(static_cast<double>(n_coh));
  return sum_rate_optimal(length, rates.depth_count(), users_per_cell);
}

PilotVector brute_force_sum_optimal(int pilot_count,
                                    const DepthRateTable& rates,
                                    int users_per_cell) {
  const auto candidates =
      enumerate_vectors(rates.depth_count(), users_per_cell, pilot_count);
  if (candidates.empty()) {
    throw std::invalid_argument("no valid vector has pilot count " +
                                std::to_string(pilot_count));
  }
  const PilotVector* best = nullptr;
  double best_value = 0.0;
  for (const auto& p : candidates) {
    const double v = sum_rate(p, rates);
    if (!best || v > best_value ||
        (v == best_value && p.leaves < best->leaves)) {
      best = &p;
      best_value = v;
    }
  }
  return *best;
}

PilotVector brute_force_net_optimal(long long n_coh,
                                    const DepthRateTable& rates,
                                    int users_per_cell) {
  if (n_coh < users_per_cell) {
    throw std::invalid_argument(
        "coherence interval is shorter than the minimum pilot");
  }
  const auto candidates =
      enumerate_vectors(rates.depth_count(), users_per_cell);
  const PilotVector* best = nullptr;
  double best_value = 0.0;
  for (const auto& p : candidates) {
    const double v = net_rate(p, static_cast<double>(n_coh), rates);
    if (!best || v > best_value ||
        (v == best_value && p.leaves < best->leaves)) {
      best = &p;
      best_value = v;
    }
  }
  return *best;
}

CheckedAssignment optimal_assignment_checked(long long n_coh,
                                             const DepthRateTable& rates,
                                             int users_per_cell) {
  CheckedAssignment result;
  result.closed_form = optimal_assignment(n_coh, rates, users_per_cell);
  result.brute_force = brute_force_net_optimal(n_coh, rates, users_per_cell);
  const double a =
      net_rate(result.closed_form, static_cast<double>(n_coh), rates);
  const double b =
      net_rate(result.brute_force, static_cast<double>(n_coh), rates);
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  result.net_rates_match = std::abs(a - b) <= 1e-12 * scale;
  return result;
}

}  // namespace pilotplan
