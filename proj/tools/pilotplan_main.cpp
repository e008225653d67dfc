// Copyright 2026 pilotplan developers.
// SPDX-License-Identifier: Apache-2.0
//
// pilotplan: plans uplink pilot reuse for hexagonal cellular networks.
// Subcommands estimate per-depth user rates by Monte Carlo, sweep optimal
// pilot assignments over coherence intervals, emit net-rate comparison
// curves, and run the verification suites. All outputs are CSV/JSON with
// provenance headers; identical configurations produce byte-identical files.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pilotplan/channel_mc.hpp"
#include "pilotplan/hexlattice.hpp"
#include "pilotplan/pilot_opt.hpp"
#include "pilotplan/rate_eval.hpp"
#include "pilotplan/verify.hpp"

namespace fs = std::filesystem;
using namespace pilotplan;

namespace {

constexpr const char* kVersion = "1.0.0";

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitVerification = 4;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  int m = 4;
  int k = 1;
  FadingParams fading;
  long long trials = 100000;
  unsigned long long seed = 1;
  long long ncoh = 0;
  long long ncoh_max = 0;  // 0 -> 200 * k
  std::string out_dir = "out";
  std::string rates_path;
  std::vector<std::string> schemes = {"optimal", "full_reuse", "random"};
  std::vector<std::string> semantics = {"net"};
  long long random_trials = 400;
  int workers = 0;
  bool verify_flag = false;
  std::string lattice_csv;

  long long grid_max() const { return ncoh_max > 0 ? ncoh_max : 200LL * k; }
};

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  return out;
}

void finish_output(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out.good()) {
    throw IoError("write failed for " + path.string());
  }
}

fs::path ensure_out_dir(const RunConfig& cfg) {
  const fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create output directory " + dir.string() + ": " +
                  ec.message());
  }
  return dir;
}

void write_provenance(std::ostream& out, const RunConfig& cfg) {
  out << "# pilotplan " << kVersion << "\n";
  out << "# key: " << rate_table_key(cfg.m, cfg.fading, cfg.trials, cfg.seed)
      << "\n";
}

DepthRateTable simulate_rates(const RunConfig& cfg) {
  const TorusLattice lattice(cfg.m, cfg.fading.cell_radius_m);
  return estimate_depth_rates(lattice, cfg.fading, cfg.trials, cfg.seed,
                              cfg.workers);
}

DepthRateTable load_rates_file(const fs::path& path, const RunConfig& cfg,
                               bool must_match) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("rate table " + path.string() +
                  " is missing or unreadable; generate one with "
                  "`pilotplan rates`");
  }
  std::string key;
  DepthRateTable table = read_rate_table_csv(in, &key);
  const std::string expected =
      rate_table_key(cfg.m, cfg.fading, cfg.trials, cfg.seed);
  if (must_match && key != expected) {
    throw std::invalid_argument(
        "rate table " + path.string() + " was produced with different "
        "parameters\n  file key: " + key + "\n  requested: " + expected +
        "\nre-run `pilotplan rates` with the current flags or pass a matching "
        "--rates file");
  }
  return table;
}

// Reuses a cached table when its provenance key matches; simulates and
// caches otherwise.
DepthRateTable load_or_make_rates(const RunConfig& cfg) {
  if (!cfg.rates_path.empty()) {
    return load_rates_file(cfg.rates_path, cfg, /*must_match=*/true);
  }
  const fs::path cached = fs::path(cfg.out_dir) / "rates.csv";
  if (fs::exists(cached)) {
    std::ifstream in(cached);
    std::string key;
    try {
      DepthRateTable table = read_rate_table_csv(in, &key);
      if (key == rate_table_key(cfg.m, cfg.fading, cfg.trials, cfg.seed)) {
        return table;
      }
    } catch (const std::exception&) {
      // fall through to re-simulation
    }
  }
  DepthRateTable table = simulate_rates(cfg);
  const fs::path dir = ensure_out_dir(cfg);
  auto out = open_output(dir / "rates.csv");
  write_rate_table_csv(table, cfg.m, out);
  finish_output(out, dir / "rates.csv");
  return table;
}

int cmd_rates(const RunConfig& cfg) {
  const DepthRateTable table = simulate_rates(cfg);
  const fs::path dir = ensure_out_dir(cfg);
  const fs::path path = dir / "rates.csv";
  auto out = open_output(path);
  write_rate_table_csv(table, cfg.m, out);
  finish_output(out, path);

  if (!cfg.lattice_csv.empty()) {
    const TorusLattice lattice(cfg.m, cfg.fading.cell_radius_m);
    auto lout = open_output(cfg.lattice_csv);
    write_lattice_csv(lattice, lout);
    finish_output(lout, cfg.lattice_csv);
  }

  std::cout << "wrote " << path.string() << "\n";
  for (int d = 0; d < table.depth_count(); ++d) {
    std::cout << "  C_" << d << " = " << table.rates[d] << " +- "
              << table.stderrs[d] << " bits/s/Hz\n";
  }
  std::cout << "linear fit max relative residual: "
            << 100.0 * table.max_linear_fit_residual() << "%\n";
  return 0;
}

struct TableRow {
  long long start = 0;
  long long end = 0;
  PilotVector assignment;
};

std::vector<TableRow> sweep_table(const RunConfig& cfg,
                                  const DepthRateTable& rates) {
  std::vector<TableRow> rows;
  for (long long n = cfg.k; n <= cfg.grid_max(); ++n) {
    const PilotVector p = brute_force_net_optimal(n, rates, cfg.k);
    if (rows.empty() || !(rows.back().assignment == p)) {
      rows.push_back({n, n, p});
    } else {
      rows.back().end = n;
    }
  }
  return rows;
}

int cmd_table(const RunConfig& cfg) {
  const DepthRateTable rates = load_or_make_rates(cfg);
  const auto rows = sweep_table(cfg, rates);

  const fs::path dir = ensure_out_dir(cfg);
  const fs::path path = dir / ("table_k" + std::to_string(cfg.k) + ".csv");
  auto out = open_output(path);
  write_provenance(out, cfg);
  out << "ncoh_range_start,ncoh_range_end,p_vector,npil\n";
  for (const TableRow& row : rows) {
    out << row.start << ',' << row.end << ",\"" << row.assignment.to_string()
        << "\"," << row.assignment.pilot_count() << "\n";
  }
  finish_output(out, path);
  std::cout << "wrote " << path.string() << " (" << rows.size() << " rows)\n";

  if (cfg.verify_flag) {
    long long mismatches = 0;
    for (long long n = cfg.k; n <= cfg.grid_max(); ++n) {
      if (!optimal_assignment_checked(n, rates, cfg.k).net_rates_match) {
        ++mismatches;
        std::cerr << "closed-form mismatch at ncoh=" << n << "\n";
      }
    }
    std::cout << "closed-form cross-check: " << mismatches << " mismatches over "
              << (cfg.grid_max() - cfg.k + 1) << " values\n";
  }
  return 0;
}

int cmd_optimal(const RunConfig& cfg) {
  if (cfg.ncoh <= 0) {
    throw std::invalid_argument("optimal requires --ncoh");
  }
  const DepthRateTable rates = load_or_make_rates(cfg);
  const CheckedAssignment checked =
      optimal_assignment_checked(cfg.ncoh, rates, cfg.k);
  const PilotVector& best = checked.brute_force;

  nlohmann::json doc;
  doc["ncoh"] = cfg.ncoh;
  doc["users_per_cell"] = cfg.k;
  doc["cells"] = best.cell_count();
  doc["assignment"] = best.to_string();
  doc["pilot_count"] = best.pilot_count();
  doc["sum_rate"] = sum_rate(best, rates);
  doc["net_rate"] = net_rate(best, static_cast<double>(cfg.ncoh), rates);
  doc["closed_form"] = checked.closed_form.to_string();
  doc["closed_form_matches"] = checked.net_rates_match;
  std::cout << doc.dump(2) << "\n";
  return 0;
}

int cmd_curves(const RunConfig& cfg) {
  const DepthRateTable rates = load_or_make_rates(cfg);
  const TorusLattice lattice(cfg.m, cfg.fading.cell_radius_m);

  std::vector<long long> grid;
  for (long long n = cfg.k; n <= cfg.grid_max(); n += cfg.k) grid.push_back(n);

  const fs::path dir = ensure_out_dir(cfg);
  CurveMcConfig mc;
  mc.trials = cfg.random_trials;
  mc.seed = cfg.seed;
  mc.workers = cfg.workers;

  for (const std::string& scheme_name : cfg.schemes) {
    const Scheme scheme = scheme_from_string(scheme_name);
    for (const std::string& sem_name : cfg.semantics) {
      const CurveValue semantics = curve_value_from_string(sem_name);
      const NetRateCurve curve =
          build_curve(scheme, semantics, grid, cfg.k, rates, lattice,
                      cfg.fading, mc);
      const fs::path path =
          dir / ("curve_" + to_string(scheme) + "_" + to_string(semantics) +
                 "_k" + std::to_string(cfg.k) + ".csv");
      auto out = open_output(path);
      write_provenance(out, cfg);
      write_curve_csv(curve, out);
      finish_output(out, path);
      std::cout << "wrote " << path.string() << "\n";
      if (scheme == Scheme::random) {
        double worst = 0.0;
        for (const CurvePoint& pt : curve.points) {
          worst = std::max(worst, pt.cap_hit_fraction);
        }
        std::cout << "  random baseline: max rate-cap hit fraction "
                  << worst << "\n";
      }
    }
  }
  return 0;
}

int cmd_verify(const RunConfig& cfg) {
  const auto results = run_verification(cfg.seed);
  for (const PropertyResult& r : results) {
    std::cout << (r.passed ? "[PASS] " : "[FAIL] ") << r.name;
    if (!r.passed) std::cout << ": " << r.detail;
    std::cout << "\n";
  }
  const fs::path dir = ensure_out_dir(cfg);
  const fs::path path = dir / "verify_report.json";
  auto out = open_output(path);
  write_verify_json(results, cfg.seed, out);
  finish_output(out, path);
  std::cout << "report: " << path.string() << "\n";
  if (!all_passed(results)) {
    std::cerr << "verification failed\n";
    return kExitVerification;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;

  CLI::App app{"pilot reuse planning for hexagonal cellular networks"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "flat key=value configuration file");
  app.fallthrough();

  app.add_option("--m", cfg.m, "lattice exponent, 3^m cells (even)")
      ->check(CLI::Range(2, 8));
  app.add_option("--k", cfg.k, "users per cell")->check(CLI::PositiveNumber);
  app.add_option("--gamma", cfg.fading.gamma, "signal decay exponent");
  app.add_option("--sigma-db", cfg.fading.shadow_sigma_db,
                 "shadow fading standard deviation in dB");
  app.add_option("--cell-radius", cfg.fading.cell_radius_m,
                 "cell center-to-vertex radius in meters");
  app.add_option("--hole-radius", cfg.fading.hole_radius_m,
                 "user-free radius around the base station in meters");
  app.add_option("--trials", cfg.trials, "Monte Carlo trials per depth")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", cfg.seed, "master random seed");
  app.add_option("--ncoh", cfg.ncoh, "coherence interval for `optimal`");
  app.add_option("--ncoh-max", cfg.ncoh_max,
                 "sweep upper bound (default 200*K)");
  app.add_option("--schemes", cfg.schemes,
                 "curve schemes: optimal, full_reuse, random")
      ->delimiter(',');
  app.add_option("--semantics", cfg.semantics,
                 "curve values: net, net_per_user, net_over_ncoh")
      ->delimiter(',');
  app.add_option("--random-trials", cfg.random_trials,
                 "Monte Carlo trials per random-baseline point")
      ->check(CLI::PositiveNumber);
  app.add_option("--out", cfg.out_dir, "output directory")
      ->envname("PILOTPLAN_OUT");
  app.add_option("--rates", cfg.rates_path,
                 "precomputed rate table CSV (must match the configuration)");
  app.add_option("--workers", cfg.workers,
                 "worker threads (0 = hardware concurrency)");
  app.add_flag("--verify", cfg.verify_flag,
               "cross-check closed forms against the enumeration oracle");
  app.add_option("--lattice-csv", cfg.lattice_csv,
                 "also export the lattice coset summary (rates subcommand)");

  auto* rates = app.add_subcommand("rates", "estimate per-depth user rates");
  auto* table = app.add_subcommand("table", "optimal assignment sweep");
  auto* optimal = app.add_subcommand("optimal", "single coherence query (JSON)");
  auto* curves = app.add_subcommand("curves", "net-rate comparison curves");
  auto* verify = app.add_subcommand("verify", "run the property suites");
  app.require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    cfg.fading.validate();
    if (rates->parsed()) return cmd_rates(cfg);
    if (table->parsed()) return cmd_table(cfg);
    if (optimal->parsed()) return cmd_optimal(cfg);
    if (curves->parsed()) return cmd_curves(cfg);
    if (verify->parsed()) return cmd_verify(cfg);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return 0;
}
