// Copyright 2026 pilotplan developers.
// SPDX-License-Identifier: Apache-2.0

#include "pilotplan/channel_mc.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "pilotplan/parallel.hpp"

namespace pilotplan {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void FadingParams::validate() const {
  if (!(gamma > 2.0)) {
    throw std::invalid_argument("decay exponent must exceed 2");
  }
  if (!(shadow_sigma_db >= 0.0)) {
    throw std::invalid_argument("shadow sigma must be non-negative");
  }
  if (!(cell_radius_m > 0.0)) {
    throw std::invalid_argument("cell radius must be positive");
  }
  const double inradius = kSqrt3 / 2.0 * cell_radius_m;
  if (!(hole_radius_m >= 0.0) || hole_radius_m >= inradius) {
    throw std::invalid_argument(
        "hole radius must lie in [0, cell inradius)");
  }
}

bool DepthRateTable::strictly_increasing() const {
  for (size_t i = 1; i < rates.size(); ++i) {
    if (!(rates[i] > rates[i - 1])) return false;
  }
  return true;
}

double DepthRateTable::max_linear_fit_residual() const {
  const int n = depth_count();
  if (n < 2) return 0.0;
  // Least squares of rate vs depth index.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int d = 0; d < n; ++d) {
    sx += d;
    sy += rates[d];
    sxx += double(d) * d;
    sxy += d * rates[d];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / n;
  double worst = 0.0;
  for (int d = 0; d < n; ++d) {
    const double fit = intercept + slope * d;
    worst = std::max(worst, std::abs(fit - rates[d]) / std::abs(rates[d]));
  }
  return worst;
}

double shadow_draw(SubstreamRng& rng, double shadow_sigma_db) {
  if (shadow_sigma_db == 0.0) return 1.0;
  const double x_db = shadow_sigma_db * rng.next_normal();
  return std::pow(10.0, x_db / 10.0);
}

double slow_fade(double distance_m, double z, const FadingParams& params) {
  if (!(distance_m > 0.0)) {
    throw std::domain_error("slow fading undefined at zero distance");
  }
  return z / std::pow(distance_m, params.gamma);
}

double asymptotic_rate(double beta_own,
                       std::span<const double> beta_interferers) {
  if (beta_interferers.empty()) {
    throw std::domain_error(
        "rate limit requires at least one co-pilot interferer");
  }
  if (!(beta_own > 0.0)) {
    throw std::domain_error("desired-link fading factor must be positive");
  }
  double interference = 0.0;
  for (const double b : beta_interferers) interference += b * b;
  return std::log2(1.0 + beta_own * beta_own / interference);
}

Vec2 draw_position(const TorusLattice& lattice, int cell_index,
                   SubstreamRng& rng, const FadingParams& params) {
  const double rc = params.cell_radius_m;
  const double half_span = kSqrt3 / 2.0 * rc;  // hexagon extent along x
  const double hole2 = params.hole_radius_m * params.hole_radius_m;
  const Vec2 c = lattice.center(cell_index);
  for (;;) {
    const double x = (2.0 * rng.next_unit() - 1.0) * half_span;
    const double y = (2.0 * rng.next_unit() - 1.0) * rc;
    // Hexagon with vertices at 30 + 60k degrees: |projection| onto each of
    // the three neighbor directions at most spacing/2.
    const double p1 = std::abs(x);
    const double p2 = std::abs(0.5 * x + kSqrt3 / 2.0 * y);
    const double p3 = std::abs(0.5 * x - kSqrt3 / 2.0 * y);
    if (p1 > half_span || p2 > half_span || p3 > half_span) continue;
    if (x * x + y * y < hole2) continue;
    return {c.x + x, c.y + y};
  }
}

TrialDraw draw_depth_trial(const TorusLattice& lattice, int reference_cell,
                           int depth, const FadingParams& params,
                           SubstreamRng& rng) {
  TrialDraw draw;
  draw.user_pos = draw_position(lattice, reference_cell, rng, params);
  draw.user_shadow = shadow_draw(rng, params.shadow_sigma_db);
  // Dominant-interferer model: one co-pilot user in one of the nearest
  // co-pilot cells (uniformly chosen; they are equivalent by symmetry).
  const auto nearest = lattice.nearest_copilot_cells(reference_cell, depth);
  const int cell =
      nearest[static_cast<size_t>(rng.next_u64() % nearest.size())];
  draw.interferer_pos.push_back(draw_position(lattice, cell, rng, params));
  draw.interferer_shadow.push_back(shadow_draw(rng, params.shadow_sigma_db));
  return draw;
}

double rate_for_draw(const TorusLattice& lattice, int reference_cell,
                     const TrialDraw& draw, const FadingParams& params) {
  const Vec2 bs = lattice.center(reference_cell);
  const double beta_own =
      slow_fade(lattice.torus_distance(draw.user_pos, bs), draw.user_shadow,
                params);
  std::vector<double> betas(draw.interferer_pos.size());
  for (size_t i = 0; i < betas.size(); ++i) {
    betas[i] = slow_fade(lattice.torus_distance(draw.interferer_pos[i], bs),
                         draw.interferer_shadow[i], params);
  }
  return asymptotic_rate(beta_own, betas);
}

DepthRateTable estimate_depth_rates(const TorusLattice& lattice,
                                    const FadingParams& params,
                                    std::int64_t trials, std::uint64_t seed,
                                    int workers) {
  params.validate();
  if (trials < 1) {
    throw std::invalid_argument("trial count must be at least 1");
  }
  const int depths = lattice.exponent();
  const int reference_cell = 0;

  DepthRateTable table;
  table.trials = trials;
  table.seed = seed;
  table.params = params;
  table.rates.resize(depths);
  table.stderrs.resize(depths);

  std::vector<double> samples(trials);
  for (int d = 0; d < depths; ++d) {
    parallel_for_chunks(trials, workers, [&](std::int64_t lo, std::int64_t hi) {
      for (std::int64_t t = lo; t < hi; ++t) {
        SubstreamRng rng(seed, static_cast<std::uint64_t>(RngDomain::depth_rates),
                         static_cast<std::uint64_t>(d),
                         static_cast<std::uint64_t>(t));
        const TrialDraw draw =
            draw_depth_trial(lattice, reference_cell, d, params, rng);
        samples[t] = rate_for_draw(lattice, reference_cell, draw, params);
      }
    });
    // Fixed-order reduction keeps the result independent of worker count.
    double mean = 0.0;
    for (std::int64_t t = 0; t < trials; ++t) mean += samples[t];
    mean /= static_cast<double>(trials);
    double var = 0.0;
    for (std::int64_t t = 0; t < trials; ++t) {
      const double dv = samples[t] - mean;
      var += dv * dv;
    }
    var = trials > 1 ? var / static_cast<double>(trials - 1) : 0.0;
    table.rates[d] = mean;
    table.stderrs[d] = std::sqrt(var / static_cast<double>(trials));
  }
  return table;
}

std::string rate_table_key(int exponent, const FadingParams& params,
                           std::int64_t trials, std::uint64_t seed) {
  std::ostringstream out;
  out << "m=" << exponent << " gamma=" << fmt_double(params.gamma)
      << " sigma_db=" << fmt_double(params.shadow_sigma_db)
      << " cell_radius_m=" << fmt_double(params.cell_radius_m)
      << " hole_radius_m=" << fmt_double(params.hole_radius_m)
      << " trials=" << trials << " seed=" << seed;
  return out.str();
}

void write_rate_table_csv(const DepthRateTable& table, int exponent,
                          std::ostream& out) {
  out << "# key: " << rate_table_key(exponent, table.params, table.trials,
                                     table.seed)
      << "\n";
  out << "depth,rate_bits,stderr,trials,seed\n";
  for (int d = 0; d < table.depth_count(); ++d) {
    out << d << ',' << fmt_double(table.rates[d]) << ','
        << fmt_double(table.stderrs[d]) << ',' << table.trials << ','
        << table.seed << "\n";
  }
}

DepthRateTable read_rate_table_csv(std::istream& in, std::string* key) {
  DepthRateTable table;
  std::string line;
  bool have_params = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# key: ", 0) == 0) {
      const std::string k = line.substr(7);
      if (key) *key = k;
      // Recover params from the key for downstream consumers.
      std::istringstream ks(k);
      std::string tok;
      while (ks >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const std::string name = tok.substr(0, eq);
        const std::string val = tok.substr(eq + 1);
        if (name == "gamma") table.params.gamma = std::stod(val);
        else if (name == "sigma_db") table.params.shadow_sigma_db = std::stod(val);
        else if (name == "cell_radius_m") table.params.cell_radius_m = std::stod(val);
        else if (name == "hole_radius_m") table.params.hole_radius_m = std::stod(val);
      }
      have_params = true;
      continue;
    }
    if (line[0] == '#' || line.rfind("depth,", 0) == 0) continue;
    std::istringstream row(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (fields.size() != 5) {
      throw std::runtime_error("malformed rate table row: " + line);
    }
    table.rates.push_back(std::stod(fields[1]));
    table.stderrs.push_back(std::stod(fields[2]));
    table.trials = std::stoll(fields[3]);
    table.seed = std::stoull(fields[4]);
  }
  if (table.rates.empty() || !have_params) {
    throw std::runtime_error("rate table CSV missing key line or rows");
  }
  return table;
}

}  // namespace pilotplan
