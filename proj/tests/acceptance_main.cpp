// Copyright 2026 pilotplan developers.
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: exercises the full pipeline at the reference
// configuration (81 cells, gamma 3.8, 8 dB shadowing, 1600 m cells, 100 m
// holes) and checks every promised result at its stated tolerance, printing
// one PASS/FAIL line per criterion. Exit status is the number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pilotplan/channel_mc.hpp"
#include "pilotplan/hexlattice.hpp"
#include "pilotplan/pilot_opt.hpp"
#include "pilotplan/rate_eval.hpp"
#include "pilotplan/rng.hpp"

using namespace pilotplan;
using Clock = std::chrono::steady_clock;

namespace {

constexpr std::uint64_t kSeed = 1;
constexpr std::int64_t kTrials = 100000;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

DepthRateTable table_of(std::vector<double> rates) {
  DepthRateTable t;
  t.rates = std::move(rates);
  t.stderrs.assign(t.rates.size(), 0.0);
  return t;
}

DepthRateTable random_linear_table(int depths, SubstreamRng& rng) {
  const double c0 = 0.5 + 19.5 * rng.next_unit();
  const double slope = 0.3 + 7.7 * rng.next_unit();
  std::vector<double> rates(depths);
  for (int i = 0; i < depths; ++i) rates[i] = c0 + slope * i;
  return table_of(std::move(rates));
}

PilotVector one_hot(int depth, int depth_count, int users_per_cell) {
  PilotVector p;
  p.users_per_cell = users_per_cell;
  p.leaves.assign(depth_count, 0);
  p.leaves[depth] =
      users_per_cell * static_cast<int>(std::llround(std::pow(3.0, depth)));
  return p;
}

double solve_intersection(const PilotVector& shorter, const PilotVector& longer,
                          const DepthRateTable& rates) {
  const auto f = [&](double x) {
    return net_rate(shorter, x, rates) - net_rate(longer, x, rates);
  };
  double lo = longer.pilot_count() + 1e-9;
  double hi = 2.0 * longer.pilot_count() + 16.0;
  while (f(hi) > 0.0) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Distinct optimal vectors over an integer coherence sweep, with the first
// interval value where each appears.
struct SweepRow {
  long long start;
  PilotVector assignment;
};

std::vector<SweepRow> sweep(const DepthRateTable& rates, int k, long long lo,
                            long long hi) {
  std::vector<SweepRow> rows;
  for (long long n = lo; n <= hi; ++n) {
    PilotVector p = brute_force_net_optimal(n, rates, k);
    if (rows.empty() || !(rows.back().assignment == p)) {
      rows.push_back({n, std::move(p)});
    }
  }
  return rows;
}

struct Criterion {
  std::string name;
  std::function<void(std::ostringstream&)> body;
};

}  // namespace

int main() {
  const TorusLattice lattice(4, 1600.0);
  const FadingParams params{};

  // Reference pipeline, timed for criterion 10: simulate the depth rates at
  // the full trial count, sweep both assignment tables, and build the three
  // comparison curves.
  const auto pipeline_start = Clock::now();
  const DepthRateTable sim =
      estimate_depth_rates(lattice, params, kTrials, kSeed);
  const auto table_k1 = sweep(sim, 1, 1, 200);
  const auto table_k2 = sweep(sim, 2, 2, 400);
  std::vector<long long> grid;
  for (long long n = 1; n <= 200; ++n) grid.push_back(n);
  const NetRateCurve curve_opt =
      build_curve(Scheme::optimal, CurveValue::net, grid, 1, sim, lattice,
                  params);
  const NetRateCurve curve_full =
      build_curve(Scheme::full_reuse, CurveValue::net, grid, 1, sim, lattice,
                  params);
  CurveMcConfig mc;
  mc.trials = 400;
  mc.seed = kSeed;
  const NetRateCurve curve_rand = build_curve(
      Scheme::random, CurveValue::net, grid, 1, sim, lattice, params, mc);
  const double pipeline_seconds = seconds_since(pipeline_start);

  std::vector<Criterion> criteria;

  criteria.push_back({"1 closed-form optimum equals the enumeration oracle "
                      "(81 cells, K=1..3, all lengths, 100 linear tables)",
                      [&](std::ostringstream& fail) {
    const auto t0 = Clock::now();
    SubstreamRng rng(kSeed, 9001, 0, 0);
    std::map<int, std::map<int, std::vector<PilotVector>>> by_len;
    for (const int k : {1, 2, 3}) {
      for (const PilotVector& p : enumerate_vectors(4, k)) {
        by_len[k][p.pilot_count()].push_back(p);
      }
    }
    for (int rep = 0; rep < 100; ++rep) {
      const DepthRateTable t = random_linear_table(4, rng);
      for (const int k : {1, 2, 3}) {
        for (const int len : valid_lengths(4, k)) {
          const PilotVector closed = sum_rate_optimal(len, 4, k);
          double best = -1.0;
          for (const PilotVector& p : by_len[k][len]) {
            best = std::max(best, sum_rate(p, t));
          }
          if (sum_rate(closed, t) != best) {
            fail << "K=" << k << " length " << len << " rep " << rep
                 << ": closed form " << closed.to_string() << " gives "
                 << sum_rate(closed, t) << ", oracle max " << best;
            return;
          }
        }
      }
    }
    const double dt = seconds_since(t0);
    if (dt >= 10.0) fail << "took " << dt << " s (budget 10 s)";
  }});

  criteria.push_back({"2 breakpoints match solved curve intersections "
                      "(rel 1e-9) and the worked values exactly",
                      [&](std::ostringstream& fail) {
    SubstreamRng rng(kSeed, 9002, 0, 0);
    for (int rep = 0; rep < 50; ++rep) {
      const DepthRateTable t = random_linear_table(4, rng);
      for (const int k : {1, 2}) {
        const BreakpointTable bp = compute_breakpoints(t, k);
        for (int n = 1; n <= bp.count(); ++n) {
          const PilotVector shorter = sum_rate_optimal(2 * n + k - 2, 4, k);
          const PilotVector longer = sum_rate_optimal(2 * n + k, 4, k);
          const double solved = solve_intersection(shorter, longer, t);
          const double closed = bp.ratios[n - 1] * k;
          if (std::abs(solved - closed) > 1e-9 * std::abs(closed)) {
            fail << "rep " << rep << " K=" << k << " n=" << n << ": closed "
                 << closed << " vs solved " << solved;
            return;
          }
        }
      }
    }
    const DepthRateTable lin = table_of({1.0, 7.0, 13.0, 19.0});
    const BreakpointTable bp1 = compute_breakpoints(lin, 1);
    if (bp1.ratios[0] != 10.0 / 3.0) {
      fail << "Delta_1 = " << bp1.ratios[0] << ", expected 10/3";
      return;
    }
    if (bp1.ratios[1] != 12.0) {
      fail << "Delta_2 = " << bp1.ratios[1] << ", expected 12";
      return;
    }
    const BreakpointTable bp2 = compute_breakpoints(lin, 2);
    if (bp2.ratios[0] != 7.0 / 3.0) {
      fail << "Delta^(2)_1 = " << bp2.ratios[0] << ", expected 7/3";
    }
  }});

  criteria.push_back({"3 K=1 sweep reproduces the 14-row reference table, "
                      "boundaries within 30%",
                      [&](std::ostringstream& fail) {
    const std::vector<std::string> expected = {
        "(1,0,0,0)", "(0,3,0,0)",  "(0,2,3,0)",  "(0,1,6,0)",  "(0,0,9,0)",
        "(0,0,8,3)", "(0,0,7,6)",  "(0,0,6,9)",  "(0,0,5,12)", "(0,0,4,15)",
        "(0,0,3,18)", "(0,0,2,21)", "(0,0,1,24)", "(0,0,0,27)"};
    if (table_k1.size() != expected.size()) {
      fail << "sweep produced " << table_k1.size() << " rows, expected 14";
      return;
    }
    for (size_t i = 0; i < expected.size(); ++i) {
      if (table_k1[i].assignment.to_string() != expected[i]) {
        fail << "row " << i << " is " << table_k1[i].assignment.to_string()
             << ", expected " << expected[i];
        return;
      }
    }
    const std::vector<long long> reference = {7,  24, 28, 32, 71, 75, 79,
                                              83, 87, 91, 95, 99, 103};
    for (size_t i = 0; i < reference.size(); ++i) {
      const long long got = table_k1[i + 1].start;
      const double rel =
          std::abs(double(got - reference[i])) / double(reference[i]);
      if (rel > 0.30) {
        fail << "transition " << i + 1 << " at " << got << " vs reference "
             << reference[i] << " (" << 100 * rel << "%)";
        return;
      }
    }
  }});

  criteria.push_back({"4 K=2 sweep reproduces the reference row sequence in order",
                      [&](std::ostringstream& fail) {
    const std::vector<std::string> head = {"(2,0,0,0)", "(1,3,0,0)",
                                           "(0,6,0,0)", "(0,5,3,0)",
                                           "(0,4,6,0)"};
    if (table_k2.size() < head.size()) {
      fail << "sweep produced only " << table_k2.size() << " rows";
      return;
    }
    for (size_t i = 0; i < head.size(); ++i) {
      if (table_k2[i].assignment.to_string() != head[i]) {
        fail << "row " << i << " is " << table_k2[i].assignment.to_string()
             << ", expected " << head[i];
        return;
      }
    }
    if (table_k2.back().assignment.to_string() != "(0,0,0,54)") {
      fail << "terminal row is " << table_k2.back().assignment.to_string();
      return;
    }
    // the whole sequence must follow the leaf-shift chain
    PilotVector p = sum_rate_optimal(2, 4, 2);
    for (size_t i = 0; i < table_k2.size(); ++i) {
      if (!(table_k2[i].assignment == p)) {
        fail << "row " << i << " departs from the length-step chain";
        return;
      }
      if (p.pilot_count() < 54) p = next_length_step(p);
    }
  }});

  criteria.push_back({"5 optimal-vs-full-reuse gains near 35/59/81% at "
                      "N_coh 20/40/80; random baseline crosses full reuse",
                      [&](std::ostringstream& fail) {
    // grid is 1..200, so index n-1 holds the N_coh = n point
    const std::vector<long long> at = {20, 40, 80};
    const std::vector<double> reference = {35.0, 59.0, 81.0};
    for (size_t i = 0; i < at.size(); ++i) {
      const double opt = curve_opt.points[at[i] - 1].value;
      const double full = curve_full.points[at[i] - 1].value;
      const double gain_pct = 100.0 * (opt / full - 1.0);
      if (std::abs(gain_pct - reference[i]) > 15.0) {
        fail << "gain at N_coh=" << at[i] << " is " << gain_pct
             << "%, reference " << reference[i] << "%";
        return;
      }
    }
    // random baseline: below full reuse on a short interval, above on a
    // long one (pilot pool matched to the optimal scheme's)
    const long long n_small = 10, n_large = 150;
    const double rand_small = curve_rand.points[n_small - 1].value;
    const double rand_large = curve_rand.points[n_large - 1].value;
    const double full_small = curve_full.points[n_small - 1].value;
    const double full_large = curve_full.points[n_large - 1].value;
    if (!(rand_small < full_small)) {
      fail << "random " << rand_small << " not below full reuse "
           << full_small << " at N_coh=" << n_small;
      return;
    }
    if (!(rand_large > full_large)) {
      fail << "random " << rand_large << " not above full reuse "
           << full_large << " at N_coh=" << n_large;
    }
  }});

  criteria.push_back({"6 full-reuse net rate per interval peaks at "
                      "N_coh/K=2 and the optimum there is full reuse "
                      "(K=1,2,14)",
                      [&](std::ostringstream& fail) {
    for (const int k : {1, 2, 14}) {
      const PilotVector full = one_hot(0, 4, k);
      long long best_n = 0;
      double best_v = -1e300;
      for (long long n = k; n <= 200LL * k; n += k) {
        const double v = net_rate(full, double(n), sim) / double(n);
        if (v > best_v) {
          best_v = v;
          best_n = n;
        }
      }
      if (best_n != 2 * k) {
        fail << "K=" << k << ": peak at N_coh=" << best_n << ", expected "
             << 2 * k;
        return;
      }
      if (!(optimal_assignment(2 * k, sim, k) == full)) {
        fail << "K=" << k << ": optimal assignment at N_coh=2K is "
             << optimal_assignment(2 * k, sim, k).to_string();
        return;
      }
      if (k <= 3 && !(brute_force_net_optimal(2 * k, sim, k) == full)) {
        fail << "K=" << k << ": oracle optimum at N_coh=2K is not full reuse";
        return;
      }
    }
  }});

  criteria.push_back({"7 one-hot per-user curves are bit-identical across "
                      "K=1,2,14",
                      [&](std::ostringstream& fail) {
    for (int depth = 0; depth < 4; ++depth) {
      for (long long x = 1; x <= 200; ++x) {
        const double base = net_rate_per_user(one_hot(depth, 4, 1), x, sim);
        for (const int k : {2, 14}) {
          const double v = net_rate_per_user(one_hot(depth, 4, k), x, sim);
          if (v != base) {
            fail << "depth " << depth << " x=" << x << " K=" << k << ": " << v
                 << " vs " << base;
            return;
          }
        }
      }
    }
  }});

  criteria.push_back({"8 structural suites: achievable lengths, transition "
                      "bounds, round trip, step chain, realizations, count",
                      [&](std::ostringstream& fail) {
    const auto lengths = valid_lengths(4, 1);
    const std::vector<int> expected_lengths = {1, 3, 5, 7, 9, 11, 13, 15, 17, 19, 21,
                                    23, 25, 27};
    if (lengths != expected_lengths) {
      fail << "achievable length set is wrong";
      return;
    }
    const auto all_k1 = enumerate_vectors(4, 1);
    if (all_k1.size() != 23) {
      fail << "enumeration count " << all_k1.size() << ", expected 23";
      return;
    }
    for (const int k : {1, 2, 3}) {
      for (const PilotVector& p : enumerate_vectors(4, k)) {
        const TransitionVector t = to_transition(p);
        long long total = 0;
        for (size_t i = 0; i < t.splits.size(); ++i) {
          const long long cap =
              k * static_cast<long long>(std::llround(std::pow(3.0, i)));
          if (t.splits[i] < 0 || t.splits[i] > cap) {
            fail << p.to_string() << ": split bound violated";
            return;
          }
          total += t.splits[i];
        }
        if (2 * total != p.pilot_count() - k) {
          fail << p.to_string() << ": split total mismatch";
          return;
        }
        if (!(from_transition(t) == p)) {
          fail << p.to_string() << ": round trip failed";
          return;
        }
        const PilotRealization r = realize(p, lattice);
        for (int cell = 0; cell < lattice.cell_count(); ++cell) {
          const auto& slots = r.cell_slots[cell];
          if (static_cast<int>(slots.size()) != k ||
              std::set<int>(slots.begin(), slots.end()).size() !=
                  slots.size()) {
            fail << p.to_string() << ": bad slots in cell " << cell;
            return;
          }
        }
        for (int pilot = 0; pilot < r.pilot_count(); ++pilot) {
          const CosetId coset = r.pilot_cosets[pilot];
          const auto members = lattice.cells_in_coset(coset);
          int uses = 0;
          for (const int cell : members) {
            uses += static_cast<int>(std::count(r.cell_slots[cell].begin(),
                                                r.cell_slots[cell].end(),
                                                pilot));
          }
          if (uses != static_cast<int>(members.size())) {
            fail << p.to_string() << ": pilot " << pilot << " used " << uses
                 << " of " << members.size();
            return;
          }
        }
      }
      PilotVector chain = sum_rate_optimal(k, 4, k);
      for (const int len : valid_lengths(4, k)) {
        if (!(chain == sum_rate_optimal(len, 4, k))) {
          fail << "K=" << k << ": step chain diverged at length " << len;
          return;
        }
        if (len + 2 <= 27 * k) chain = next_length_step(chain);
      }
    }
  }});

  criteria.push_back({"9 simulated per-depth growth near gamma*log2(3), "
                      "near-linear table",
                      [&](std::ostringstream& fail) {
    const double slope = params.gamma * std::log2(3.0);
    for (int d = 0; d + 1 < sim.depth_count(); ++d) {
      const double diff = sim.rates[d + 1] - sim.rates[d];
      if (std::abs(diff - slope) > 0.20 * slope) {
        fail << "C_" << d + 1 << "-C_" << d << " = " << diff
             << ", expected within 20% of " << slope;
        return;
      }
    }
    const double residual = sim.max_linear_fit_residual();
    if (residual >= 0.15) {
      fail << "max linear-fit residual " << 100 * residual << "%";
    }
  }});

  criteria.push_back({"10 bit-identical outputs across worker counts; "
                      "reference pipeline under 2 minutes",
                      [&](std::ostringstream& fail) {
    const DepthRateTable serial =
        estimate_depth_rates(lattice, params, 500, kSeed, 1);
    const DepthRateTable threaded =
        estimate_depth_rates(lattice, params, 500, kSeed, 4);
    std::ostringstream a, b;
    write_rate_table_csv(serial, 4, a);
    write_rate_table_csv(threaded, 4, b);
    if (a.str() != b.str()) {
      fail << "rate table CSV differs between 1 and 4 workers";
      return;
    }
    const auto r1 =
        random_assignment_net_rate(9, 50, 1, lattice, params, 60, kSeed, 1);
    const auto r4 =
        random_assignment_net_rate(9, 50, 1, lattice, params, 60, kSeed, 4);
    if (r1.net_rate != r4.net_rate ||
        r1.cap_hit_fraction != r4.cap_hit_fraction) {
      fail << "random baseline differs between 1 and 4 workers";
      return;
    }
    if (pipeline_seconds >= 120.0) {
      fail << "pipeline took " << pipeline_seconds << " s (budget 120 s)";
    }
  }});

  int failures = 0;
  for (const Criterion& c : criteria) {
    std::ostringstream fail;
    try {
      c.body(fail);
    } catch (const std::exception& e) {
      fail << "exception: " << e.what();
    }
    const bool ok = fail.str().empty();
    failures += ok ? 0 : 1;
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << c.name;
    if (!ok) std::cout << " -- " << fail.str();
    std::cout << "\n";
  }
  std::printf("%d/%zu criteria passed; reference pipeline %.1f s\n",
              static_cast<int>(criteria.size()) - failures, criteria.size(),
              pipeline_seconds);
  return failures;
}
