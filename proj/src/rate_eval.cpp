// Copyright 2026 pilotplan developers.
// SPDX-License-Identifier: Apache-2.0

#include "pilotplan/rate_eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "pilotplan/parallel.hpp"
#include "pilotplan/pilot_opt.hpp"
#include "pilotplan/rng.hpp"

namespace pilotplan {

namespace {

double pow3d(int e) {
  double v = 1.0;
  while (e-- > 0) v *= 3.0;
  return v;
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void require_compatible(const PilotVector& p, const DepthRateTable& rates) {
  if (p.depth_count() != rates.depth_count()) {
    throw std::invalid_argument(
        "pilot vector and rate table cover different depth counts");
  }
}

}  // namespace

double sum_rate(const PilotVector& p, const DepthRateTable& rates) {
  require_compatible(p, rates);
  double acc = 0.0;
  for (int i = 0; i < p.depth_count(); ++i) {
    if (p.leaves[i] == 0) continue;
    acc += p.leaves[i] * rates.rates[i] / pow3d(i);
  }
  return acc;
}

double net_rate(const PilotVector& p, double n_coh,
                const DepthRateTable& rates) {
  if (!(n_coh > 0.0)) {
    throw std::invalid_argument("coherence interval must be positive");
  }
  const double ratio = (n_coh - p.pilot_count()) / n_coh;
  return ratio * sum_rate(p, rates);
}

double net_rate_per_user(const PilotVector& p, long long ncoh_over_k,
                         const DepthRateTable& rates) {
  require_compatible(p, rates);
  if (ncoh_over_k <= 0) {
    throw std::invalid_argument("coherence interval must be positive");
  }
  const long long k = p.users_per_cell;
  // Integer numerator/denominator before the one division keeps the shared
  // factor K exactly cancellable, so one-hot vectors give K-independent bits.
  const long long num = ncoh_over_k * k - p.pilot_count();
  const long long den = ncoh_over_k * k;
  const double ratio = static_cast<double>(num) / static_cast<double>(den);
  double per_user_sum = 0.0;
  long long weight = k;  // K * 3^i
  for (int i = 0; i < p.depth_count(); ++i, weight *= 3) {
    if (p.leaves[i] == 0) continue;
    per_user_sum += static_cast<double>(p.leaves[i]) /
                    static_cast<double>(weight) * rates.rates[i];
  }
  return ratio * per_user_sum;
}

double reuse3_crossover_ratio(double sir_linear, double gamma) {
  if (!(sir_linear > 0.0) || !(gamma > 0.0)) {
    throw std::invalid_argument("crossover needs positive SIR and exponent");
  }
  return 3.0 + std::log2(sir_linear) / gamma;
}

RandomAssignmentEstimate random_assignment_net_rate(
    int n_pil, long long n_coh, int users_per_cell,
    const TorusLattice& lattice, const FadingParams& params,
    std::int64_t trials, std::uint64_t seed, int workers) {
  params.validate();
  if (n_pil < users_per_cell) {
    throw std::invalid_argument(
        "cannot keep the users of a cell on distinct pilots: pilot pool "
        "smaller than the user count");
  }
  if (n_coh <= 0) {
    throw std::invalid_argument("coherence interval must be positive");
  }
  if (trials < 1) {
    throw std::invalid_argument("trial count must be at least 1");
  }

  const int cells = lattice.cell_count();
  const int k = users_per_cell;
  const int users = cells * k;
  const double beta_far = slow_fade(lattice.torus_diameter(), 1.0, params);
  const double beta_far2 = beta_far * beta_far;

  std::vector<double> cell_sums(trials);
  std::vector<std::int64_t> cap_hits(trials, 0);

  parallel_for_chunks(trials, workers, [&](std::int64_t lo, std::int64_t hi) {
    std::vector<int> pilot_of(users);
    std::vector<Vec2> pos(users);
    std::vector<double> own_beta(users);
    std::vector<std::vector<int>> group(n_pil);
    std::vector<int> scratch(k);

    for (std::int64_t t = lo; t < hi; ++t) {
      SubstreamRng rng(seed,
                       static_cast<std::uint64_t>(RngDomain::random_assignment),
                       static_cast<std::uint64_t>(n_pil),
                       static_cast<std::uint64_t>(t));
      for (auto& g : group) g.clear();

      for (int cell = 0; cell < cells; ++cell) {
        // K distinct pilots per cell, uniform over the pool.
        for (int j = 0; j < k; ++j) {
          int draw;
          bool fresh;
          do {
            draw = static_cast<int>(rng.next_u64() % n_pil);
            fresh = true;
            for (int q = 0; q < j; ++q) {
              if (scratch[q] == draw) {
                fresh = false;
                break;
              }
            }
          } while (!fresh);
          scratch[j] = draw;
          const int u = cell * k + j;
          pilot_of[u] = draw;
          group[draw].push_back(u);
          pos[u] = draw_position(lattice, cell, rng, params);
          const double z = shadow_draw(rng, params.shadow_sigma_db);
          own_beta[u] = slow_fade(
              lattice.torus_distance(pos[u], lattice.center(cell)), z, params);
        }
      }

      double total = 0.0;
      std::int64_t hits = 0;
      for (int u = 0; u < users; ++u) {
        const int cell = u / k;
        const Vec2 bs = lattice.center(cell);
        // Dominant interferer: the same-pilot user whose cell center is
        // nearest on the torus (ties resolved by user order).
        int dominant = -1;
        double dominant_dist = 0.0;
        for (const int v : group[pilot_of[u]]) {
          if (v / k == cell) continue;
          const double d = lattice.torus_distance(lattice.center(v / k), bs);
          if (dominant < 0 || d < dominant_dist) {
            dominant = v;
            dominant_dist = d;
          }
        }
        const double own2 = own_beta[u] * own_beta[u];
        const double cap = std::log2(1.0 + own2 / beta_far2);
        double rate;
        if (dominant < 0) {
          rate = cap;
          ++hits;
        } else {
          const double z = shadow_draw(rng, params.shadow_sigma_db);
          const double beta = slow_fade(
              lattice.torus_distance(pos[dominant], bs), z, params);
          rate = std::log2(1.0 + own2 / (beta * beta));
          if (rate > cap) {
            rate = cap;
            ++hits;
          }
        }
        total += rate;
      }
      cell_sums[t] = total / cells;
      cap_hits[t] = hits;
    }
  });

  double mean = 0.0;
  std::int64_t hits = 0;
  for (std::int64_t t = 0; t < trials; ++t) {
    mean += cell_sums[t];
    hits += cap_hits[t];
  }
  mean /= static_cast<double>(trials);

  RandomAssignmentEstimate est;
  est.net_rate =
      (static_cast<double>(n_coh) - n_pil) / static_cast<double>(n_coh) * mean;
  est.cap_hit_fraction = static_cast<double>(hits) /
                         (static_cast<double>(trials) * users);
  return est;
}

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::optimal: return "optimal";
    case Scheme::full_reuse: return "full_reuse";
    case Scheme::random: return "random";
  }
  return "?";
}

std::string to_string(CurveValue v) {
  switch (v) {
    case CurveValue::net: return "net";
    case CurveValue::net_per_user: return "net_per_user";
    case CurveValue::net_over_ncoh: return "net_over_ncoh";
  }
  return "?";
}

Scheme scheme_from_string(const std::string& name) {
  if (name == "optimal") return Scheme::optimal;
  if (name == "full_reuse" || name == "full") return Scheme::full_reuse;
  if (name == "random") return Scheme::random;
  throw std::invalid_argument("unknown scheme: " + name);
}

CurveValue curve_value_from_string(const std::string& name) {
  if (name == "net") return CurveValue::net;
  if (name == "net_per_user" || name == "per_user") return CurveValue::net_per_user;
  if (name == "net_over_ncoh") return CurveValue::net_over_ncoh;
  throw std::invalid_argument("unknown value semantics: " + name);
}

NetRateCurve build_curve(Scheme scheme, CurveValue semantics,
                         std::span<const long long> ncoh_grid,
                         int users_per_cell, const DepthRateTable& rates,
                         const TorusLattice& lattice,
                         const FadingParams& params, const CurveMcConfig& mc) {
  NetRateCurve curve;
  curve.scheme = scheme;
  curve.value_semantics = semantics;
  curve.users_per_cell = users_per_cell;
  curve.points.reserve(ncoh_grid.size());

  PilotVector full;
  full.users_per_cell = users_per_cell;
  full.leaves.assign(rates.depth_count(), 0);
  full.leaves[0] = users_per_cell;

  for (const long long n_coh : ncoh_grid) {
    if (n_coh % users_per_cell != 0) {
      throw std::invalid_argument(
          "curve grid values must be multiples of the user count");
    }
    CurvePoint pt;
    const long long ratio_units = n_coh / users_per_cell;
    pt.x = semantics == CurveValue::net ? static_cast<double>(n_coh)
                                        : static_cast<double>(ratio_units);

    PilotVector chosen;
    if (scheme == Scheme::full_reuse) {
      chosen = full;
    } else {
      chosen = brute_force_net_optimal(n_coh, rates, users_per_cell);
    }
    pt.n_pil = chosen.pilot_count();

    if (scheme == Scheme::random) {
      const RandomAssignmentEstimate est = random_assignment_net_rate(
          pt.n_pil, n_coh, users_per_cell, lattice, params, mc.trials,
          mc.seed, mc.workers);
      pt.cap_hit_fraction = est.cap_hit_fraction;
      switch (semantics) {
        case CurveValue::net: pt.value = est.net_rate; break;
        case CurveValue::net_per_user:
          pt.value = est.net_rate / users_per_cell;
          break;
        case CurveValue::net_over_ncoh:
          pt.value = est.net_rate / static_cast<double>(n_coh);
          break;
      }
    } else {
      switch (semantics) {
        case CurveValue::net:
          pt.value = net_rate(chosen, static_cast<double>(n_coh), rates);
          break;
        case CurveValue::net_per_user:
          pt.value = net_rate_per_user(chosen, ratio_units, rates);
          break;
        case CurveValue::net_over_ncoh:
          pt.value = net_rate(chosen, static_cast<double>(n_coh), rates) /
                     static_cast<double>(n_coh);
          break;
      }
    }
    curve.points.push_back(pt);
  }
  return curve;
}

void write_curve_csv(const NetRateCurve& curve, std::ostream& out) {
  const std::string x_sem =
      curve.value_semantics == CurveValue::net ? "ncoh" : "ncoh_over_k";
  out << "# value: " << to_string(curve.value_semantics) << "\n";
  out << "scheme,K,x_semantics,x,value,npil\n";
  for (const CurvePoint& pt : curve.points) {
    out << to_string(curve.scheme) << ',' << curve.users_per_cell << ','
        << x_sem << ',' << fmt_double(pt.x) << ',' << fmt_double(pt.value)
        << ',' << pt.n_pil << "\n";
  }
}

}  // namespace pilotplan
