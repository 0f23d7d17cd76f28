#include <CLI11.hpp>

#include <cmath>
#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"pvsc - battery dispatch for a photovoltaic self-consumption group"};
  app.require_subcommand(1);

  pvsc::cli::CalibrateArgs calibrate_args;
  CLI::App* calibrate = app.add_subcommand(
      "calibrate", "Fit seasonal curves and OU parameters from CSV series");
  calibrate->add_option("--price", calibrate_args.price_csv, "Price CSV (EUR/MWh)");
  calibrate->add_option("--demand", calibrate_args.demand_csv, "Demand CSV (MW)");
  calibrate->add_option("--pv", calibrate_args.pv_csv, "PV production CSV (MW)");
  calibrate->add_option("--frequencies", calibrate_args.frequencies,
                        "Harmonic frequencies, 1/hour");
  calibrate->add_option("--out", calibrate_args.out_dir, "Output directory");

  pvsc::cli::SolveArgs solve_args;
  CLI::App* solve = app.add_subcommand(
      "solve", "Solve the dispatch equation and emit value/policy slices");
  solve->add_option("--config", solve_args.config_path, "Config file")->required();
  solve->add_option("--out", solve_args.out_dir, "Output directory");
  solve->add_option("--slice-times", solve_args.slice_times,
                    "Slice times (HH:MM or decimal hours)");
  solve->add_flag("--paper-verbatim-stencil", solve_args.paper_verbatim_stencil,
                  "Forward-difference drift stencil everywhere");
  solve->add_option("--dense-controls", solve_args.dense_controls,
                    "Minimize over an N x N control lattice instead of the "
                    "bang-bang candidates");
  solve->add_option("--tau", solve_args.time_step, "Override time step (hours)");
  solve->add_option("--p-step", solve_args.p_step, "Override p step");
  solve->add_option("--s-step", solve_args.s_step, "Override SoC step (MWh)");
  solve->add_option("--threads", solve_args.threads, "Worker threads (0 = auto)");

  pvsc::cli::SimulateArgs sim_args;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Monte Carlo cost of the solved policy and baselines");
  simulate->add_option("--config", sim_args.config_path, "Config file")->required();
  simulate->add_option("--checkpoint", sim_args.checkpoint_path, "Solver checkpoint")
      ->required();
  simulate->add_option("--out", sim_args.out_dir, "Output directory");
  simulate->add_option("--paths", sim_args.paths, "Number of paths");
  simulate->add_option("--seed", sim_args.seed, "RNG seed");
  simulate->add_option("--t0", sim_args.t0_hours, "Start time (hours)");
  simulate->add_option("--p0", sim_args.p0, "Initial PV log-level");
  simulate->add_option("--s0", sim_args.s0_mwh, "Initial SoC (MWh), default empty");
  simulate->add_option("--threads", sim_args.threads, "Worker threads (0 = auto)");

  pvsc::cli::PolicyArgs policy_args;
  CLI::App* policy = app.add_subcommand(
      "policy", "Optimal action and marginal gauges at one state");
  policy->add_option("--config", policy_args.config_path, "Config file")->required();
  policy->add_option("--checkpoint", policy_args.checkpoint_path, "Solver checkpoint")
      ->required();
  policy->add_option("--t", policy_args.time_text, "Time (HH:MM or decimal hours)")
      ->required();
  policy->add_option("--p", policy_args.p, "PV log-level")->required();
  policy->add_option("--s", policy_args.s_mwh, "State of charge (MWh)")->required();

  pvsc::cli::ReportArgs report_args;
  CLI::App* report = app.add_subcommand(
      "report", "Verify an output directory and print its diagnostics");
  report->add_option("dir", report_args.dir, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (calibrate->parsed()) return pvsc::cli::run_calibrate(calibrate_args, std::cout);
    if (solve->parsed()) return pvsc::cli::run_solve(solve_args, std::cout);
    if (simulate->parsed()) return pvsc::cli::run_simulate(sim_args, std::cout);
    if (policy->parsed()) return pvsc::cli::run_policy(policy_args, std::cout);
    if (report->parsed()) return pvsc::cli::run_report(report_args, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
