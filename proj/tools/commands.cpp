#include "commands.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "pvsc/checkpoint.hpp"
#include "pvsc/config.hpp"
#include "pvsc/csv_io.hpp"
#include "pvsc/hashing.hpp"
#include "pvsc/hjb.hpp"
#include "pvsc/presets.hpp"

namespace pvsc::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string hex64(std::uint64_t value) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << value;
  return out.str();
}

// Collects emitted files and finishes with a checksum manifest.
class OutputDir {
 public:
  explicit OutputDir(const std::string& dir) : dir_(dir) {
    fs::create_directories(dir_);
  }

  std::string path(const std::string& name) {
    names_.push_back(name);
    return (dir_ / name).string();
  }

  void write_manifest() {
    json entries = json::array();
    for (const auto& name : names_) {
      std::ifstream in(dir_ / name, std::ios::binary);
      std::ostringstream bytes;
      bytes << in.rdbuf();
      const std::string payload = bytes.str();
      entries.push_back({{"name", name},
                         {"bytes", payload.size()},
                         {"fnv1a64", hex64(fnv1a64(payload))}});
    }
    json manifest;
    manifest["files"] = entries;
    std::ofstream out(dir_ / "manifest.json");
    out << manifest.dump(2) << '\n';
  }

 private:
  fs::path dir_;
  std::vector<std::string> names_;
};

std::string time_label(double t_hours) {
  int minutes = static_cast<int>(std::lround(t_hours * 60.0));
  minutes %= 24 * 60;
  if (minutes < 0) minutes += 24 * 60;
  char buf[8];
  std::snprintf(buf, sizeof(buf), "%02d%02d", minutes / 60, minutes % 60);
  return buf;
}

json grid_json(const SolverGrid& grid) {
  return json{{"time_step", grid.time_step}, {"p_min", grid.p_min},
              {"p_max", grid.p_max},         {"p_step", grid.p_step},
              {"s_min", grid.s_min},         {"s_step", grid.s_step},
              {"n_t", grid.n_t},             {"n_p", grid.n_p},
              {"n_s", grid.n_s}};
}

void write_slice_csv(const std::string& path, const Solution& sol, int slice) {
  const SolverGrid& grid = sol.value.grid;
  std::ofstream out(path);
  out << "p,s,value_eur,a_star,c_star_mw,regime\n";
  for (int n = 0; n < grid.n_p; ++n) {
    for (int k = 0; k < grid.n_s; ++k) {
      const ControlAction& action = sol.policy.action(slice, n, k);
      out << format_full(grid.p(n)) << ',' << format_full(grid.s(k)) << ','
          << format_full(sol.value.at(slice, n, k)) << ','
          << format_full(action.charge_fraction) << ','
          << format_full(action.discharge_mw) << ','
          << to_string(sol.policy.regime(slice, n, k)) << '\n';
    }
  }
}

json shape_json(const ShapeReport& report) {
  return json{{"max_s_monotonicity_eur", report.max_s_monotonicity},
              {"max_s_convexity_eur", report.max_s_convexity},
              {"max_p_monotonicity_eur", report.max_p_monotonicity},
              {"worst_relative", report.worst_relative},
              {"nodes_beyond_tolerance", report.nodes_beyond_tolerance}};
}

void write_meta(OutputDir& out_dir, const std::string& command, double wall_seconds) {
  json meta;
  meta["command"] = command;
  meta["tool"] = "pvsc 0.1.0";
  meta["wall_time_s"] = wall_seconds;
  std::ofstream out(out_dir.path("meta.json"));
  out << meta.dump(2) << '\n';
}

class WallClock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace

int run_calibrate(const CalibrateArgs& args, std::ostream& log) {
  std::vector<double> freqs = args.frequencies;
  if (freqs.empty()) freqs = {1.0 / 24.0, 1.0 / 12.0, 1.0 / 8.0};

  OutputDir out_dir(args.out_dir);
  ConfigMap fragment;
  const auto put = [&fragment](const std::string& key, double value) {
    fragment[key] = format_full(value);
  };

  const auto fit_series = [&](const std::string& csv, const std::string& prefix) {
    const SeriesSample sample = read_series_csv(csv);
    const HarmonicFit fit = fit_harmonic(sample, freqs);
    put(prefix + ".intercept", fit.spec.intercept);
    put(prefix + ".intercept.se", fit.std_errors[0]);
    for (std::size_t h = 0; h < fit.spec.harmonics.size(); ++h) {
      const std::string base = prefix + ".h" + std::to_string(h + 1);
      put(base + ".freq", fit.spec.harmonics[h].frequency);
      put(base + ".sin", fit.spec.harmonics[h].sine_amp);
      put(base + ".sin.se", fit.std_errors[1 + 2 * h]);
      put(base + ".cos", fit.spec.harmonics[h].cosine_amp);
      put(base + ".cos.se", fit.std_errors[2 + 2 * h]);
    }
    const double dt = (sample.t_hours.back() - sample.t_hours.front()) /
                      (sample.t_hours.size() - 1);
    const OuFit ou = fit_ou(fit.residuals, dt);
    put(prefix + ".ou.xi", ou.params.mean_reversion);
    put(prefix + ".ou.xi.se", ou.se_mean_reversion);
    put(prefix + ".ou.sigma", ou.params.volatility);
    put(prefix + ".ou.sigma.se", ou.se_volatility);
    log << prefix << ": " << sample.values.size() << " samples, ou xi="
        << ou.params.mean_reversion << "/h sigma=" << ou.params.volatility
        << "/sqrt(h)\n";
  };

  if (!args.price_csv.empty()) fit_series(args.price_csv, "price");
  if (!args.demand_csv.empty()) fit_series(args.demand_csv, "demand");
  if (!args.pv_csv.empty()) {
    const SeriesSample sample = read_series_csv(args.pv_csv);
    const PvFit fit = fit_pv(sample);
    put("pv.amplitude_mw", fit.spec.amplitude_mw);
    put("pv.amplitude_mw.se", fit.se_amplitude);
    put("pv.freq", fit.spec.frequency);
    put("pv.phase_hours", fit.spec.phase_hours);
    put("pv.phase_hours.se", fit.se_phase_hours);
    put("pv.ou.xi", fit.ou.params.mean_reversion);
    put("pv.ou.xi.se", fit.ou.se_mean_reversion);
    put("pv.ou.sigma", fit.ou.params.volatility);
    put("pv.ou.sigma.se", fit.ou.se_volatility);
    log << "pv: " << sample.values.size() << " samples (" << fit.day_samples
        << " daytime), A=" << fit.spec.amplitude_mw
        << " MW phase=" << fit.spec.phase_hours << " h\n";
  }

  {
    std::ofstream out(out_dir.path("calibration.conf"));
    out << serialize_flat_config(fragment);
  }
  out_dir.write_manifest();
  log << "wrote " << args.out_dir << "/calibration.conf\n";
  return 0;
}

int run_solve(const SolveArgs& args, std::ostream& log) {
  const WallClock clock;
  const ConfigMap map = read_flat_config(args.config_path);
  const ModelConfig config = model_config_from_map(map);
  validate(config);

  const SolverGrid base_grid = solver_grid_from_map(map, config);
  SolverGrid grid = base_grid;
  const bool overridden = !std::isnan(args.time_step) || !std::isnan(args.p_step) ||
                          !std::isnan(args.s_step);
  if (overridden) {
    grid = make_solver_grid(
        config, std::isnan(args.time_step) ? base_grid.time_step : args.time_step,
        base_grid.p_min, base_grid.p_max,
        std::isnan(args.p_step) ? base_grid.p_step : args.p_step,
        std::isnan(args.s_step) ? base_grid.s_step : args.s_step);
  }

  SolveOptions options;
  options.paper_verbatim_stencil = args.paper_verbatim_stencil;
  options.dense_controls = args.dense_controls;
  options.threads = args.threads;

  log << "solving on " << grid.n_t << " x " << grid.n_p << " x " << grid.n_s
      << " nodes\n";
  const Solution sol = solve(config, grid, options);
  if (sol.cfl_max > 1.0) {
    log << "warning: explicit s-step CFL " << sol.cfl_max
        << " > 1, the scheme is not monotone on this grid\n";
  }

  OutputDir out_dir(args.out_dir);
  const std::uint64_t hash = config_hash(config);
  write_checkpoint(out_dir.path("checkpoint.bin"), sol.value, sol.policy, hash);

  std::vector<std::string> slice_times = args.slice_times;
  if (slice_times.empty()) {
    slice_times = {"03:43", "07:26", "12:00", "16:08", "19:01"};
  }
  json slice_info = json::array();
  for (const auto& text : slice_times) {
    const double requested = parse_time_hours(text);
    int index = static_cast<int>(std::lround(requested / grid.time_step));
    index = std::clamp(index, 0, grid.n_t - 1);
    const std::string name = "slice_" + time_label(requested) + ".csv";
    write_slice_csv(out_dir.path(name), sol, index);
    slice_info.push_back({{"requested", text},
                          {"grid_time_hours", grid.time(index)},
                          {"slice_index", index},
                          {"file", name}});
  }

  const ShapeReport shape = check_shape(sol.value, 1e-9);
  json diagnostics;
  diagnostics["config_hash"] = hex64(hash);
  diagnostics["grid"] = grid_json(grid);
  diagnostics["cfl_max"] = sol.cfl_max;
  diagnostics["shape"] = shape_json(shape);
  diagnostics["slices"] = slice_info;

  if (overridden) {
    // Solve the config grid as well and report value deltas at shared probe
    // points, an empirical convergence check.
    const Solution base_sol = solve(config, base_grid, options);
    double max_delta = 0.0, sum_delta = 0.0;
    int probes = 0;
    for (int it = 0; it <= 4; ++it) {
      for (int ip = 0; ip <= 4; ++ip) {
        for (int is = 0; is <= 4; ++is) {
          const double t = config.horizon_hours * it / 4.0;
          const double p = base_grid.p_min +
                           (base_grid.p(base_grid.n_p - 1) - base_grid.p_min) * ip / 4.0;
          const double s = base_grid.s_min +
                           (base_grid.s(base_grid.n_s - 1) - base_grid.s_min) * is / 4.0;
          const double delta = std::abs(value_at(sol.value, t, p, s) -
                                        value_at(base_sol.value, t, p, s));
          max_delta = std::max(max_delta, delta);
          sum_delta += delta;
          ++probes;
        }
      }
    }
    diagnostics["convergence"] = {{"config_grid", grid_json(base_grid)},
                                  {"override_grid", grid_json(grid)},
                                  {"max_value_delta_eur", max_delta},
                                  {"mean_value_delta_eur", sum_delta / probes}};
  }

  {
    std::ofstream out(out_dir.path("diagnostics.json"));
    out << diagnostics.dump(2) << '\n';
  }
  write_meta(out_dir, "solve", clock.seconds());
  out_dir.write_manifest();
  log << "value range at t=0: [" << sol.value.at(0, 0, grid.n_s - 1) << ", "
      << sol.value.at(0, grid.n_p - 1, 0) << "] EUR; wrote " << args.out_dir
      << "\n";
  return 0;
}

int run_simulate(const SimulateArgs& args, std::ostream& log) {
  const WallClock clock;
  const ConfigMap map = read_flat_config(args.config_path);
  const ModelConfig config = model_config_from_map(map);
  validate(config);

  const Checkpoint cp = read_checkpoint(args.checkpoint_path);
  const std::uint64_t hash = config_hash(config);
  if (cp.config_hash != hash) {
    throw CheckpointError("simulate: checkpoint config hash " +
                          hex64(cp.config_hash) + " does not match config " +
                          hex64(hash));
  }

  const SolverGrid& grid = cp.value.grid;
  const double tau = grid.time_step;
  // Snap the start time onto the solver lattice so policy lookups align.
  const int start_index =
      std::clamp(static_cast<int>(std::lround(args.t0_hours / tau)), 0, grid.n_t - 2);
  const double t0 = grid.time(start_index);
  const double s0 = std::isnan(args.s0_mwh) ? config.battery.soc_min_mwh : args.s0_mwh;
  TimeGrid mc_grid{t0, tau, grid.n_t - start_index};

  const double reference = value_at(cp.value, t0, args.p0, s0);

  const PolicyFunction extracted = lattice_policy(cp.policy, config);
  const PolicyFunction idle = [](double, double, double) { return ControlAction{}; };
  const double gamma = config.battery.max_discharge_mw;
  const PolicyFunction always_discharge = [gamma](double, double, double) {
    return ControlAction{0.0, gamma};
  };

  McOptions options;
  options.threads = args.threads;
  struct Row {
    std::string name;
    McResult result;
  };
  std::vector<Row> rows;
  for (const auto& [name, policy] :
       std::vector<std::pair<std::string, const PolicyFunction*>>{
           {"extracted", &extracted},
           {"always_idle", &idle},
           {"always_discharge", &always_discharge},
           {"no_battery", &idle}}) {
    rows.push_back({name, mc_cost(t0, config.fixed_log_price, config.fixed_log_demand,
                                  args.p0, s0, *policy, config, mc_grid, args.paths,
                                  args.seed, options)});
  }

  OutputDir out_dir(args.out_dir);
  {
    std::ofstream out(out_dir.path("comparison.csv"));
    out << "policy,mean_eur,std_error_eur,n_paths\n";
    for (const Row& row : rows) {
      out << row.name << ',' << format_full(row.result.mean) << ','
          << format_full(row.result.std_error) << ',' << row.result.n_paths << '\n';
    }
  }

  json diagnostics;
  diagnostics["config_hash"] = hex64(hash);
  diagnostics["start"] = {{"t0_hours", t0}, {"p0", args.p0}, {"s0_mwh", s0}};
  diagnostics["hjb_value_eur"] = reference;
  diagnostics["seed"] = args.seed;
  for (const Row& row : rows) {
    diagnostics["policies"][row.name] = {{"mean_eur", row.result.mean},
                                         {"std_error_eur", row.result.std_error}};
  }
  diagnostics["extracted_gap_eur"] = rows[0].result.mean - reference;
  {
    std::ofstream out(out_dir.path("diagnostics.json"));
    out << diagnostics.dump(2) << '\n';
  }
  write_meta(out_dir, "simulate", clock.seconds());
  out_dir.write_manifest();

  log << "hjb value " << reference << " EUR; extracted policy "
      << rows[0].result.mean << " +- " << rows[0].result.std_error << " EUR ("
      << args.paths << " paths)\n";
  for (std::size_t i = 1; i < rows.size(); ++i) {
    log << rows[i].name << ": " << rows[i].result.mean << " +- "
        << rows[i].result.std_error << " EUR\n";
  }
  return 0;
}

int run_policy(const PolicyArgs& args, std::ostream& log) {
  const ConfigMap map = read_flat_config(args.config_path);
  const ModelConfig config = model_config_from_map(map);
  validate(config);
  const Checkpoint cp = read_checkpoint(args.checkpoint_path);
  if (cp.config_hash != config_hash(config)) {
    throw CheckpointError("policy: checkpoint does not match config");
  }

  const SolverGrid& grid = cp.value.grid;
  const double t = parse_time_hours(args.time_text);
  const double value = value_at(cp.value, t, args.p, args.s_mwh);

  const double s_lo = std::max(args.s_mwh - grid.s_step, grid.s_min);
  const double s_hi = std::min(args.s_mwh + grid.s_step, grid.s(grid.n_s - 1));
  const double slope =
      (value_at(cp.value, t, args.p, s_hi) - value_at(cp.value, t, args.p, s_lo)) /
      (s_hi - s_lo);

  const double price = price_level(config, t, config.fixed_log_price);
  const double demand = demand_level(config, t, config.fixed_log_demand);
  const double pv = pv_level(config, t, args.p);
  const MarginalGauges gauges = marginal_gauges(t, price, slope, config);
  const PolicyDecision decision =
      analytic_policy(t, pv, demand, price, slope, args.s_mwh, config);

  const auto nearest = [](double v, double lo, double step, int count) {
    return std::clamp(static_cast<int>(std::lround((v - lo) / step)), 0, count - 1);
  };
  const int ni = nearest(t, 0.0, grid.time_step, grid.n_t);
  const int nn = nearest(args.p, grid.p_min, grid.p_step, grid.n_p);
  const int nk = nearest(args.s_mwh, grid.s_min, grid.s_step, grid.n_s);
  const ControlAction lattice = cp.policy.action(ni, nn, nk);

  log << "state: t=" << t << " h, p=" << args.p << ", s=" << args.s_mwh << " MWh\n";
  log << "levels: X=" << price << " EUR/MWh, D=" << demand << " MW, P=" << pv
      << " MW\n";
  log << "value = " << value << " EUR, dV/ds = " << slope << " EUR/MWh\n";
  log << "gauges: charge=" << gauges.charge << " charge_incent=" << gauges.charge_incent
      << " discharge=" << gauges.discharge
      << " discharge_incent=" << gauges.discharge_incent << "\n";
  log << "action: a*=" << decision.action.charge_fraction
      << " c*=" << decision.action.discharge_mw << " MW, regime "
      << to_string(decision.regime) << ", case " << to_string(decision.demand_case)
      << (decision.pv_positive ? " (P>0)" : " (P=0)")
      << (decision.capped ? ", charge capped" : "") << "\n";
  log << "lattice action at node (" << ni << "," << nn << "," << nk
      << "): a*=" << lattice.charge_fraction << " c*=" << lattice.discharge_mw
      << " MW, regime " << to_string(cp.policy.regime(ni, nn, nk)) << "\n";
  return 0;
}

int run_report(const ReportArgs& args, std::ostream& log) {
  const fs::path dir(args.dir);
  std::ifstream manifest_in(dir / "manifest.json");
  if (!manifest_in) {
    log << "report: no manifest.json in " << args.dir << "\n";
    return 1;
  }
  json manifest = json::parse(manifest_in);

  int bad = 0;
  for (const auto& entry : manifest.at("files")) {
    const std::string name = entry.at("name").get<std::string>();
    std::ifstream in(dir / name, std::ios::binary);
    if (!in) {
      log << "missing  " << name << "\n";
      ++bad;
      continue;
    }
    std::ostringstream bytes;
    bytes << in.rdbuf();
    const std::string checksum = hex64(fnv1a64(bytes.str()));
    const bool ok = checksum == entry.at("fnv1a64").get<std::string>();
    log << (ok ? "ok       " : "MISMATCH ") << name << "  " << bytes.str().size()
        << " bytes\n";
    if (!ok) ++bad;
  }

  std::ifstream diag_in(dir / "diagnostics.json");
  if (diag_in) {
    const json diag = json::parse(diag_in);
    if (diag.contains("shape")) {
      const auto& shape = diag["shape"];
      log << "shape: s-monotonicity " << shape["max_s_monotonicity_eur"]
          << " EUR, s-convexity " << shape["max_s_convexity_eur"]
          << " EUR, p-monotonicity " << shape["max_p_monotonicity_eur"]
          << " EUR (worst relative " << shape["worst_relative"] << ")\n";
    }
    if (diag.contains("cfl_max")) log << "cfl_max: " << diag["cfl_max"] << "\n";
    if (diag.contains("hjb_value_eur")) {
      log << "hjb value: " << diag["hjb_value_eur"] << " EUR, extracted gap "
          << diag["extracted_gap_eur"] << " EUR\n";
    }
    if (diag.contains("convergence")) {
      log << "convergence: max value delta "
          << diag["convergence"]["max_value_delta_eur"] << " EUR\n";
    }
  }
  if (bad > 0) {
    log << bad << " file(s) failed verification\n";
    return 1;
  }
  log << "all files verified\n";
  return 0;
}

}  // namespace pvsc::cli
