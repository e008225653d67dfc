// Copyright 2026 pilotplan developers.
// SPDX-License-Identifier: Apache-2.0

#include "pilotplan/channel_mc.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "pilotplan/rng.hpp"

using namespace pilotplan;

namespace {
constexpr double kSqrt3 = 1.7320508075688772;

FadingParams default_params() { return FadingParams{}; }
}  // namespace

TEST_CASE("slow fading follows the distance power law") {
  const FadingParams p = default_params();
  CHECK(slow_fade(1.0, 1.0, p) == 1.0);
  CHECK(slow_fade(2.0, 1.0, p) == doctest::Approx(0.0717936471873147).epsilon(1e-12));
  CHECK(slow_fade(10.0, 2.0, FadingParams{2.0, 0.0, 1600.0, 100.0}) ==
        doctest::Approx(0.02).epsilon(1e-12));
  CHECK_THROWS_AS(slow_fade(0.0, 1.0, p), std::domain_error);
  CHECK_THROWS_AS(slow_fade(-1.0, 1.0, p), std::domain_error);
}

TEST_CASE("rate limit from fading factors") {
  CHECK(asymptotic_rate(1.0, std::vector<double>{1.0}) == 1.0);
  CHECK(asymptotic_rate(2.0, std::vector<double>{1.0, 1.0}) ==
        doctest::Approx(1.584962500721156).epsilon(1e-15));
  CHECK(asymptotic_rate(1.0, std::vector<double>{1.0, 1.0, 1.0, 1.0}) ==
        doctest::Approx(0.32192809488736235).epsilon(1e-15));
  CHECK_THROWS_AS(asymptotic_rate(1.0, std::vector<double>{}),
                  std::domain_error);
  CHECK_THROWS_AS(asymptotic_rate(0.0, std::vector<double>{1.0}),
                  std::domain_error);
}

TEST_CASE("shadow draws are log-normal in the dB domain") {
  SUBCASE("zero spread is deterministic") {
    SubstreamRng rng(7, 0, 0, 0);
    for (int i = 0; i < 100; ++i) CHECK(shadow_draw(rng, 0.0) == 1.0);
  }

  SUBCASE("dB-domain standard deviation and median") {
    SubstreamRng rng(7, 0, 0, 1);
    const int n = 100000;
    std::vector<double> db(n);
    for (int i = 0; i < n; ++i) {
      db[i] = 10.0 * std::log10(shadow_draw(rng, 8.0));
    }
    double mean = 0.0;
    for (const double v : db) mean += v;
    mean /= n;
    double var = 0.0;
    for (const double v : db) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / (n - 1));
    CHECK(sd == doctest::Approx(8.0).epsilon(0.0125));  // 8.0 +- 0.1

    std::nth_element(db.begin(), db.begin() + n / 2, db.end());
    CHECK(std::abs(db[n / 2]) < 0.15);  // median of z is 1 <=> 0 dB
  }
}

TEST_CASE("user positions are uniform over the punctured hexagon") {
  const TorusLattice lat(4, 1600.0);
  const FadingParams p = default_params();
  const int cell = 0;
  const Vec2 c = lat.center(cell);
  SubstreamRng rng(11, 0, 0, 0);

  const int n = 100000;
  double sx = 0, sy = 0, sxx = 0, syy = 0;
  const double half_span = kSqrt3 / 2.0 * p.cell_radius_m;
  for (int i = 0; i < n; ++i) {
    const Vec2 v = draw_position(lat, cell, rng, p);
    const double x = v.x - c.x;
    const double y = v.y - c.y;
    const double r = std::hypot(x, y);
    REQUIRE(r >= p.hole_radius_m);
    REQUIRE(std::abs(x) <= half_span * (1 + 1e-12));
    REQUIRE(std::abs(0.5 * x + kSqrt3 / 2.0 * y) <= half_span * (1 + 1e-12));
    REQUIRE(std::abs(0.5 * x - kSqrt3 / 2.0 * y) <= half_span * (1 + 1e-12));
    sx += x;
    sy += y;
    sxx += x * x;
    syy += y * y;
  }
  // symmetry: empirical mean at the center within 3 standard errors
  const double se_x = std::sqrt(sxx / n) / std::sqrt(double(n));
  const double se_y = std::sqrt(syy / n) / std::sqrt(double(n));
  CHECK(std::abs(sx / n) < 3.0 * se_x);
  CHECK(std::abs(sy / n) < 3.0 * se_y);
}

TEST_CASE("hole exclusion honors a zero hole radius") {
  const TorusLattice lat(2, 500.0);
  FadingParams p = default_params();
  p.cell_radius_m = 500.0;
  p.hole_radius_m = 0.0;
  SubstreamRng rng(3, 0, 1, 2);
  for (int i = 0; i < 2000; ++i) {
    const Vec2 v = draw_position(lat, 4, rng, p);
    const Vec2 c = lat.center(4);
    CHECK(std::hypot(v.x - c.x, v.y - c.y) <= 500.0);
  }
}

// With shadowing off and everyone pinned at cell centers, the rate reduces to
// pure torus geometry. For the 81-cell lattice the depth-2 co-pilot cells sit
// at distances {3s x6, 3*sqrt(3)*s x2} from the reference base station and
// the depth-3 ones at {3*sqrt(3)*s x2}, with s the cell spacing.
TEST_CASE("pinned-geometry rates match the closed-form oracle") {
  const TorusLattice lat(4, 1600.0);
  FadingParams p = default_params();
  p.shadow_sigma_db = 0.0;
  const double s = lat.cell_spacing_m();
  const double g2 = 2.0 * p.gamma;
  const double r_user = 800.0;

  const auto pinned_rate = [&](int depth) {
    TrialDraw draw;
    const Vec2 bs = lat.center(0);
    draw.user_pos = {bs.x + r_user, bs.y};
    draw.user_shadow = 1.0;
    for (const int cell : lat.copilot_cells(0, depth)) {
      if (cell == 0) continue;
      draw.interferer_pos.push_back(lat.center(cell));
      draw.interferer_shadow.push_back(1.0);
    }
    return rate_for_draw(lat, 0, draw, p);
  };

  SUBCASE("depth 2: six near and two far interferers") {
    const double denom =
        6.0 * std::pow(3.0 * s, -g2) + 2.0 * std::pow(3.0 * kSqrt3 * s, -g2);
    const double expected = std::log2(1.0 + std::pow(r_user, -g2) / denom);
    CHECK(pinned_rate(2) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(pinned_rate(2) == doctest::Approx(23.076233138260406).epsilon(1e-9));
  }

  SUBCASE("depth 3: two interferers at 3*sqrt(3)*s") {
    const double denom = 2.0 * std::pow(3.0 * kSqrt3 * s, -g2);
    const double expected = std::log2(1.0 + std::pow(r_user, -g2) / denom);
    CHECK(pinned_rate(3) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(pinned_rate(3) == doctest::Approx(30.691430011793592).epsilon(1e-9));
  }

  SUBCASE("9-cell lattice, depth 1: two interferers at sqrt(3)*s") {
    const TorusLattice small(2, 1600.0);
    TrialDraw draw;
    draw.user_pos = {r_user, 0.0};
    draw.user_shadow = 1.0;
    for (const int cell : small.copilot_cells(0, 1)) {
      if (cell == 0) continue;
      draw.interferer_pos.push_back(small.center(cell));
      draw.interferer_shadow.push_back(1.0);
    }
    const double denom = 2.0 * std::pow(kSqrt3 * s, -g2);
    const double expected = std::log2(1.0 + std::pow(r_user, -g2) / denom);
    CHECK(rate_for_draw(small, 0, draw, p) ==
          doctest::Approx(expected).epsilon(1e-12));
  }

  SUBCASE("dominant interferer at the nearest depth-1 center") {
    TrialDraw draw;
    draw.user_pos = {lat.center(0).x + r_user, lat.center(0).y};
    draw.user_shadow = 1.0;
    draw.interferer_pos.push_back(lat.center(lat.nearest_copilot_cells(0, 1)[0]));
    draw.interferer_shadow.push_back(1.0);
    const double expected =
        std::log2(1.0 + std::pow(kSqrt3 * s / r_user, g2));
    CHECK(rate_for_draw(lat, 0, draw, p) ==
          doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("depth trials place one interferer in a nearest co-pilot cell") {
  const TorusLattice lat(4, 1600.0);
  const FadingParams p = default_params();
  for (int depth = 0; depth <= 3; ++depth) {
    const auto nearest = lat.nearest_copilot_cells(0, depth);
    for (int t = 0; t < 50; ++t) {
      SubstreamRng rng(3, 0, depth, t);
      const TrialDraw draw = draw_depth_trial(lat, 0, depth, p, rng);
      REQUIRE(draw.interferer_pos.size() == 1);
      // the interferer lies within one cell radius of a nearest center
      bool near_some = false;
      for (const int cell : nearest) {
        if (lat.torus_distance(draw.interferer_pos[0], lat.center(cell)) <=
            p.cell_radius_m * (1 + 1e-9)) {
          near_some = true;
        }
      }
      CHECK(near_some);
    }
  }
}

TEST_CASE("depth rate estimates") {
  const TorusLattice lat(4, 1600.0);
  const FadingParams p = default_params();

  SUBCASE("identical for any worker count, increasing in depth") {
    const DepthRateTable one = estimate_depth_rates(lat, p, 2000, 42, 1);
    const DepthRateTable many = estimate_depth_rates(lat, p, 2000, 42, 3);
    REQUIRE(one.depth_count() == 4);
    for (int d = 0; d < 4; ++d) {
      CHECK(one.rates[d] == many.rates[d]);
      CHECK(one.stderrs[d] == many.stderrs[d]);
      CHECK(one.stderrs[d] > 0.0);
    }
    CHECK(one.strictly_increasing());
  }

  SUBCASE("per-depth growth near gamma*log2(3)") {
    const DepthRateTable t = estimate_depth_rates(lat, p, 20000, 7);
    const double slope = 3.8 * 1.584962500721156;  // ~6.02 bits per depth
    for (int d = 0; d + 1 < t.depth_count(); ++d) {
      const double diff = t.rates[d + 1] - t.rates[d];
      CHECK(diff > 0.8 * slope);
      CHECK(diff < 1.2 * slope);
    }
    CHECK(t.max_linear_fit_residual() < 0.15);
  }

  SUBCASE("rejects empty runs") {
    CHECK_THROWS_AS(estimate_depth_rates(lat, p, 0, 1), std::invalid_argument);
  }
}

TEST_CASE("rate table CSV round-trips exactly") {
  const TorusLattice lat(2, 1600.0);
  const DepthRateTable t = estimate_depth_rates(lat, default_params(), 50, 9);
  std::ostringstream out;
  write_rate_table_csv(t, 2, out);

  std::istringstream in(out.str());
  std::string key;
  const DepthRateTable back = read_rate_table_csv(in, &key);
  CHECK(key == rate_table_key(2, t.params, t.trials, t.seed));
  REQUIRE(back.depth_count() == t.depth_count());
  for (int d = 0; d < t.depth_count(); ++d) {
    CHECK(back.rates[d] == t.rates[d]);
    CHECK(back.stderrs[d] == t.stderrs[d]);
  }
  CHECK(back.trials == t.trials);
  CHECK(back.seed == t.seed);
  CHECK(back.params.gamma == t.params.gamma);
  CHECK(back.params.cell_radius_m == t.params.cell_radius_m);
}

TEST_CASE("parameter validation") {
  FadingParams p = default_params();
  p.gamma = 2.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = default_params();
  p.shadow_sigma_db = -1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = default_params();
  p.hole_radius_m = 1600.0;  // beyond the inradius
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  CHECK_NOTHROW(default_params().validate());
}
