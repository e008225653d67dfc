// Copyright 2026 pilotplan developers.
// SPDX-License-Identifier: Apache-2.0

#include "pilotplan/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pilotplan/channel_mc.hpp"
#include "pilotplan/hexlattice.hpp"
#include "pilotplan/pilot_opt.hpp"
#include "pilotplan/rate_eval.hpp"
#include "pilotplan/rng.hpp"

namespace pilotplan {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;

struct Checker {
  std::vector<PropertyResult>* out;

  void run(const std::string& name,
           const std::function<void(std::ostringstream&)>& body) {
    PropertyResult r;
    r.name = name;
    std::ostringstream fail;
    try {
      body(fail);
      r.passed = fail.str().empty();
      r.detail = r.passed ? "ok" : fail.str();
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("exception: ") + e.what();
    }
    out->push_back(std::move(r));
  }
};

long long pow3ll(int e) {
  long long v = 1;
  while (e-- > 0) v *= 3;
  return v;
}

DepthRateTable make_table(std::vector<double> rates) {
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
  return make_table(std::move(rates));
}

// Count of valid vectors by direct recursion on the leaf counts, an
// independent route from the transition-space enumeration.
long long count_by_leaf_recursion(int depth_count, int users_per_cell) {
  std::function<long long(int, long long)> rec = [&](int i,
                                                     long long remaining) {
    // remaining = (K - partial weighted sum) * 3^(m-1)
    if (i == depth_count) return remaining == 0 ? 1LL : 0LL;
    const long long unit = pow3ll(depth_count - 1 - i);
    long long total = 0;
    const long long cap = users_per_cell * pow3ll(i);
    for (long long v = 0; v <= cap && v * unit <= remaining; ++v) {
      total += rec(i + 1, remaining - v * unit);
    }
    return total;
  };
  return rec(0, users_per_cell * pow3ll(depth_count - 1));
}

double solve_intersection(const PilotVector& shorter, const PilotVector& longer,
                          const DepthRateTable& rates) {
  // net(shorter, x) - net(longer, x) has a single root right of the longer
  // vector's zero crossing.
  const auto f = [&](double x) {
    return net_rate(shorter, x, rates) - net_rate(longer, x, rates);
  };
  double lo = longer.pilot_count() + 1e-9;
  double hi = 2.0 * longer.pilot_count() + 16.0;
  while (f(hi) > 0.0) {
    hi *= 2.0;
    if (hi > 1e18) return hi;
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

PilotVector one_hot(int depth, int depth_count, int users_per_cell) {
  PilotVector p;
  p.users_per_cell = users_per_cell;
  p.leaves.assign(depth_count, 0);
  p.leaves[depth] = static_cast<int>(users_per_cell * pow3ll(depth));
  return p;
}

}  // namespace

std::vector<PropertyResult> run_verification(std::uint64_t seed) {
  std::vector<PropertyResult> results;
  Checker check{&results};

  const std::vector<int> exponents = {2, 4};
  const std::vector<int> user_counts = {1, 2, 3};

  check.run("lattice_partition_and_hierarchy", [&](std::ostringstream& fail) {
    for (const int m : exponents) {
      const TorusLattice lat(m, 1000.0);
      for (int d = 0; d <= lat.max_depth(); ++d) {
        std::map<int, int> sizes;
        for (int i = 0; i < lat.cell_count(); ++i) {
          ++sizes[lat.coset_id(i, d).label];
        }
        if (static_cast<long long>(sizes.size()) != pow3ll(d)) {
          fail << "m=" << m << " depth " << d << ": " << sizes.size()
               << " cosets, expected " << pow3ll(d);
          return;
        }
        for (const auto& [label, n] : sizes) {
          if (n != lat.cell_count() / pow3ll(d)) {
            fail << "m=" << m << " depth " << d << " label " << label
                 << ": size " << n;
            return;
          }
        }
        if (d >= 1) {
          for (int i = 0; i < lat.cell_count(); ++i) {
            if (lat.coset_id(i, d).label / 3 != lat.coset_id(i, d - 1).label) {
              fail << "m=" << m << ": depth " << d
                   << " does not refine depth " << (d - 1);
              return;
            }
          }
        }
      }
    }
  });

  check.run("lattice_spacing_geometric", [&](std::ostringstream& fail) {
    for (const int m : exponents) {
      const TorusLattice lat(m, 1600.0);
      std::vector<double> measured(lat.max_depth() + 1);
      for (int d = 0; d <= lat.max_depth(); ++d) {
        double best = 1e300;
        for (int i = 0; i < lat.cell_count(); ++i) {
          for (const int j : lat.copilot_cells(i, d)) {
            if (j <= i) continue;
            best = std::min(best,
                            lat.torus_distance(lat.center(i), lat.center(j)));
          }
        }
        measured[d] = best;
        const double expected = lat.min_copilot_spacing(d);
        if (std::abs(best - expected) > 1e-9 * expected) {
          fail << "m=" << m << " depth " << d << ": measured " << best
               << " vs " << expected;
          return;
        }
      }
      for (int d = 0; d + 1 <= lat.max_depth(); ++d) {
        if (std::abs(measured[d + 1] / measured[d] - kSqrt3) > 1e-12) {
          fail << "m=" << m << ": spacing ratio at depth " << d << " is "
               << measured[d + 1] / measured[d];
          return;
        }
      }
    }
  });

  check.run("lattice_homogeneity", [&](std::ostringstream& fail) {
    SubstreamRng rng(seed, 77, 0, 0);
    for (const int m : exponents) {
      const TorusLattice lat(m, 500.0);
      const int side = lat.side();
      std::vector<AxialCoord> shifts;
      if (m == 2) {
        for (const AxialCoord c : lat.cells()) shifts.push_back(c);
      } else {
        for (int s = 0; s < 12; ++s) {
          shifts.push_back({static_cast<int>(rng.next_u64() % side),
                            static_cast<int>(rng.next_u64() % side)});
        }
      }
      for (const AxialCoord shift : shifts) {
        for (int d = 1; d <= lat.max_depth(); ++d) {
          std::map<int, int> mapping;
          for (int i = 0; i < lat.cell_count(); ++i) {
            const AxialCoord c = lat.cell(i);
            const int j = lat.cell_index({c.a + shift.a, c.b + shift.b});
            const int from = lat.coset_id(i, d).label;
            const int to = lat.coset_id(j, d).label;
            const auto it = mapping.find(from);
            if (it == mapping.end()) {
              mapping[from] = to;
            } else if (it->second != to) {
              fail << "m=" << m << " shift (" << shift.a << "," << shift.b
                   << ") depth " << d << ": labels do not permute";
              return;
            }
          }
          std::set<int> images;
          for (const auto& [from, to] : mapping) images.insert(to);
          if (images.size() != mapping.size()) {
            fail << "m=" << m << ": translation image is not a bijection";
            return;
          }
        }
      }
    }
  });

  check.run("transition_round_trip", [&](std::ostringstream& fail) {
    for (const int m : exponents) {
      for (const int k : user_counts) {
        for (const PilotVector& p : enumerate_vectors(m, k)) {
          if (from_transition(to_transition(p)) != p) {
            fail << "round trip failed for " << p.to_string() << " K=" << k;
            return;
          }
        }
      }
    }
  });

  check.run("transition_bounds", [&](std::ostringstream& fail) {
    for (const int m : exponents) {
      for (const int k : user_counts) {
        for (const PilotVector& p : enumerate_vectors(m, k)) {
          const TransitionVector t = to_transition(p);
          long long total = 0;
          for (int i = 0; i < static_cast<int>(t.splits.size()); ++i) {
            if (t.splits[i] < 0 || t.splits[i] > k * pow3ll(i)) {
              fail << p.to_string() << " K=" << k << ": split " << i
                   << " out of bounds";
              return;
            }
            total += t.splits[i];
          }
          if (2 * total != p.pilot_count() - k) {
            fail << p.to_string() << " K=" << k << ": split total " << total;
            return;
          }
        }
      }
    }
  });

  check.run("enumeration_counts", [&](std::ostringstream& fail) {
    if (enumerate_vectors(4, 1).size() != 23) {
      fail << "81-cell K=1 enumeration has " << enumerate_vectors(4, 1).size()
           << " vectors, expected 23";
      return;
    }
    for (const int m : exponents) {
      for (const int k : user_counts) {
        const auto vecs = enumerate_vectors(m, k);
        const long long independent = count_by_leaf_recursion(m, k);
        if (static_cast<long long>(vecs.size()) != independent) {
          fail << "m=" << m << " K=" << k << ": " << vecs.size() << " vs "
               << independent << " by direct recursion";
          return;
        }
        std::set<int> lengths;
        for (const auto& p : vecs) lengths.insert(p.pilot_count());
        const auto expected = valid_lengths(m, k);
        if (!std::equal(lengths.begin(), lengths.end(), expected.begin(),
                        expected.end())) {
          fail << "m=" << m << " K=" << k << ": length set mismatch";
          return;
        }
      }
    }
  });

  check.run("closed_form_matches_oracle", [&](std::ostringstream& fail) {
    SubstreamRng rng(seed, 101, 0, 0);
    for (int rep = 0; rep < 100; ++rep) {
      for (const int m : exponents) {
        const DepthRateTable table = random_linear_table(m, rng);
        for (const int k : user_counts) {
          for (const int len : valid_lengths(m, k)) {
            const PilotVector closed = sum_rate_optimal(len, m, k);
            const PilotVector brute = brute_force_sum_optimal(len, table, k);
            if (sum_rate(closed, table) != sum_rate(brute, table)) {
              fail << "m=" << m << " K=" << k << " len=" << len << " rep "
                   << rep << ": closed " << closed.to_string() << " vs brute "
                   << brute.to_string();
              return;
            }
          }
        }
      }
    }
  });

  check.run("length_step_chain", [&](std::ostringstream& fail) {
    for (const int m : exponents) {
      for (const int k : user_counts) {
        PilotVector p = sum_rate_optimal(k, m, k);
        for (const int len : valid_lengths(m, k)) {
          if (p != sum_rate_optimal(len, m, k)) {
            fail << "chain diverged at length " << len << " (m=" << m
                 << " K=" << k << ")";
            return;
          }
          if (len + 2 <= k * pow3ll(m - 1)) p = next_length_step(p);
        }
      }
    }
  });

  check.run("breakpoints_match_intersections", [&](std::ostringstream& fail) {
    SubstreamRng rng(seed, 202, 0, 0);
    for (int rep = 0; rep < 20; ++rep) {
      for (const int m : exponents) {
        const DepthRateTable table = random_linear_table(m, rng);
        for (const int k : {1, 2}) {
          const BreakpointTable bp = compute_breakpoints(table, k);
          for (int n = 1; n <= bp.count(); ++n) {
            const PilotVector shorter = sum_rate_optimal(2 * n + k - 2, m, k);
            const PilotVector longer = sum_rate_optimal(2 * n + k, m, k);
            const double solved = solve_intersection(shorter, longer, table);
            const double closed = bp.ratios[n - 1] * k;
            if (std::abs(solved - closed) > 1e-9 * std::abs(closed)) {
              fail << "m=" << m << " K=" << k << " n=" << n << ": closed "
                   << closed << " vs solved " << solved;
              return;
            }
          }
        }
      }
    }
  });

  check.run("assignment_consistency_sweep", [&](std::ostringstream& fail) {
    SubstreamRng rng(seed, 303, 0, 0);
    for (int rep = 0; rep < 8; ++rep) {
      for (const int m : exponents) {
        const DepthRateTable table = random_linear_table(m, rng);
        const long long cells = pow3ll(m);
        for (const int k : user_counts) {
          for (long long n_coh = k; n_coh <= 4 * cells * k; ++n_coh) {
            const PilotVector closed = optimal_assignment(n_coh, table, k);
            const PilotVector brute =
                brute_force_net_optimal(n_coh, table, k);
            const double a = net_rate(closed, double(n_coh), table);
            const double b = net_rate(brute, double(n_coh), table);
            const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
            if (std::abs(a - b) > 1e-12 * scale) {
              fail << "m=" << m << " K=" << k << " N=" << n_coh
                   << ": closed form " << closed.to_string() << " (" << a
                   << ") vs brute " << brute.to_string() << " (" << b << ")";
              return;
            }
          }
        }
      }
    }
  });

  check.run("monotone_pilot_length", [&](std::ostringstream& fail) {
    SubstreamRng rng(seed, 404, 0, 0);
    for (int rep = 0; rep < 10; ++rep) {
      for (const int m : exponents) {
        const DepthRateTable table = random_linear_table(m, rng);
        for (const int k : user_counts) {
          int prev = 0;
          for (long long n_coh = k; n_coh <= 4 * pow3ll(m) * k; ++n_coh) {
            const int len =
                optimal_assignment(n_coh, table, k).pilot_count();
            if (len < prev) {
              fail << "m=" << m << " K=" << k << ": length dropped at N="
                   << n_coh;
              return;
            }
            prev = len;
          }
        }
      }
    }
  });

  check.run("realization_validity", [&](std::ostringstream& fail) {
    for (const int m : exponents) {
      const TorusLattice lat(m, 1000.0);
      for (const int k : user_counts) {
        for (const PilotVector& p : enumerate_vectors(m, k)) {
          const PilotRealization r = realize(p, lat);
          if (r.pilot_count() != p.pilot_count()) {
            fail << p.to_string() << ": realized " << r.pilot_count()
                 << " pilots";
            return;
          }
          for (int cell = 0; cell < lat.cell_count(); ++cell) {
            const auto& slots = r.cell_slots[cell];
            if (static_cast<int>(slots.size()) != k ||
                std::set<int>(slots.begin(), slots.end()).size() !=
                    slots.size()) {
              fail << p.to_string() << " K=" << k << ": cell " << cell
                   << " has bad slots";
              return;
            }
          }
          std::vector<int> leaves_at_depth(m, 0);
          for (int pilot = 0; pilot < r.pilot_count(); ++pilot) {
            const CosetId coset = r.pilot_cosets[pilot];
            ++leaves_at_depth[coset.depth];
            int uses = 0;
            for (int cell = 0; cell < lat.cell_count(); ++cell) {
              const int n = static_cast<int>(
                  std::count(r.cell_slots[cell].begin(),
                             r.cell_slots[cell].end(), pilot));
              if (n > 1 || (n == 1 && lat.coset_id(cell, coset.depth) != coset)) {
                fail << p.to_string() << ": pilot " << pilot
                     << " misused by cell " << cell;
                return;
              }
              uses += n;
            }
            if (uses != lat.cell_count() / pow3ll(coset.depth)) {
              fail << p.to_string() << ": pilot " << pilot << " used " << uses
                   << " times";
              return;
            }
          }
          for (int d = 0; d < m; ++d) {
            if (leaves_at_depth[d] != p.leaves[d]) {
              fail << p.to_string() << ": depth " << d << " has "
                   << leaves_at_depth[d] << " pilots";
              return;
            }
          }
        }
      }
    }
  });

  check.run("net_rate_zero_crossing", [&](std::ostringstream& fail) {
    SubstreamRng rng(seed, 505, 0, 0);
    for (const int m : exponents) {
      const DepthRateTable table = random_linear_table(m, rng);
      for (const int k : user_counts) {
        for (const PilotVector& p : enumerate_vectors(m, k)) {
          if (net_rate(p, p.pilot_count(), table) != 0.0) {
            fail << p.to_string() << ": nonzero at its own pilot count";
            return;
          }
        }
      }
    }
  });

  check.run("scale_invariance", [&](std::ostringstream& fail) {
    SubstreamRng rng(seed, 606, 0, 0);
    for (int rep = 0; rep < 10; ++rep) {
      const double c = 0.1 + 10.0 * rng.next_unit();
      for (const int m : exponents) {
        const DepthRateTable table = random_linear_table(m, rng);
        DepthRateTable scaled = table;
        for (double& r : scaled.rates) r *= c;
        for (const int k : user_counts) {
          for (long long n_coh = k; n_coh <= 40 * k; n_coh += k) {
            if (brute_force_net_optimal(n_coh, table, k) !=
                brute_force_net_optimal(n_coh, scaled, k)) {
              fail << "argmax changed under scaling at N=" << n_coh;
              return;
            }
            const PilotVector p = brute_force_net_optimal(n_coh, table, k);
            const double a = net_rate(p, double(n_coh), scaled);
            const double b = c * net_rate(p, double(n_coh), table);
            if (std::abs(a - b) > 1e-12 * std::max(std::abs(a), 1e-300)) {
              fail << "net rate does not scale linearly at N=" << n_coh;
              return;
            }
          }
          const BreakpointTable bp1 = compute_breakpoints(table, k);
          const BreakpointTable bp2 = compute_breakpoints(scaled, k);
          for (int n = 0; n < bp1.count(); ++n) {
            if (std::abs(bp1.ratios[n] - bp2.ratios[n]) >
                1e-9 * bp1.ratios[n]) {
              fail << "breakpoint " << n << " moved under scaling";
              return;
            }
          }
        }
      }
      // Rate limit invariance under common scaling of all fading factors.
      std::vector<double> betas(5);
      for (double& b : betas) b = 1e-12 * (0.1 + rng.next_unit());
      const double own = 1e-12 * (0.1 + rng.next_unit());
      std::vector<double> scaled_betas = betas;
      for (double& b : scaled_betas) b *= c;
      const double r1 = asymptotic_rate(own, betas);
      const double r2 = asymptotic_rate(own * c, scaled_betas);
      if (std::abs(r1 - r2) > 1e-12 * std::max(std::abs(r1), 1e-300)) {
        fail << "rate limit not scale invariant";
        return;
      }
    }
  });

  check.run("per_user_invariance", [&](std::ostringstream& fail) {
    SubstreamRng rng(seed, 707, 0, 0);
    for (const int m : exponents) {
      const DepthRateTable table = random_linear_table(m, rng);
      for (int depth = 0; depth < m; ++depth) {
        for (long long x = 1; x <= 200; ++x) {
          const double base = net_rate_per_user(one_hot(depth, m, 1), x, table);
          for (const int k : {2, 14}) {
            const double v =
                net_rate_per_user(one_hot(depth, m, k), x, table);
            if (v != base) {
              fail << "m=" << m << " depth " << depth << " x=" << x
                   << " K=" << k << ": " << v << " vs " << base;
              return;
            }
          }
        }
      }
    }
  });

  check.run("optimal_dominates", [&](std::ostringstream& fail) {
    SubstreamRng rng(seed, 808, 0, 0);
    for (const int m : exponents) {
      const DepthRateTable table = random_linear_table(m, rng);
      for (const int k : user_counts) {
        const auto all = enumerate_vectors(m, k);
        for (long long n_coh = k; n_coh <= 120 * k; n_coh += k) {
          const PilotVector best = brute_force_net_optimal(n_coh, table, k);
          const double best_rate = net_rate(best, double(n_coh), table);
          for (const auto& p : all) {
            if (net_rate(p, double(n_coh), table) > best_rate) {
              fail << p.to_string() << " beats the optimum at N=" << n_coh;
              return;
            }
          }
        }
      }
    }
  });

  check.run("rejects_non_increasing_rates", [&](std::ostringstream& fail) {
    const DepthRateTable corrupt = make_table({5.0, 11.0, 9.0, 14.0});
    try {
      compute_breakpoints(corrupt, 1);
      fail << "non-increasing table was accepted";
    } catch (const std::domain_error&) {
      // expected
    }
  });

  check.run("mc_determinism_and_monotonicity", [&](std::ostringstream& fail) {
    const TorusLattice lat(4, 1600.0);
    const FadingParams params{};
    const DepthRateTable serial = estimate_depth_rates(lat, params, 1500, seed, 1);
    const DepthRateTable parallel = estimate_depth_rates(lat, params, 1500, seed, 4);
    for (int d = 0; d < serial.depth_count(); ++d) {
      if (serial.rates[d] != parallel.rates[d] ||
          serial.stderrs[d] != parallel.stderrs[d]) {
        fail << "worker count changed the estimate at depth " << d;
        return;
      }
    }
    if (!serial.strictly_increasing()) {
      fail << "depth rates are not strictly increasing";
    }
  });

  return results;
}

bool all_passed(const std::vector<PropertyResult>& results) {
  return std::all_of(results.begin(), results.end(),
                     [](const PropertyResult& r) { return r.passed; });
}

void write_verify_json(const std::vector<PropertyResult>& results,
                       std::uint64_t seed, std::ostream& out) {
  nlohmann::json doc;
  doc["seed"] = seed;
  doc["all_passed"] = all_passed(results);
  doc["properties"] = nlohmann::json::array();
  for (const PropertyResult& r : results) {
    doc["properties"].push_back(
        {{"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
  }
  out << doc.dump(2) << "\n";
}

}  // namespace pilotplan
