#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace pvsc::cli {

struct CalibrateArgs {
  std::string price_csv;
  std::string demand_csv;
  std::string pv_csv;
  std::vector<double> frequencies;  // default daily, half-daily, 8-hour
  std::string out_dir = ".";
};

struct SolveArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::vector<std::string> slice_times;  // default: the five critical hours
  bool paper_verbatim_stencil = false;
  int dense_controls = 0;
  unsigned threads = 0;
  // Grid overrides; NaN keeps the config value. Any override triggers a
  // convergence comparison against the config grid.
  double time_step = 0.0 / 0.0;
  double p_step = 0.0 / 0.0;
  double s_step = 0.0 / 0.0;
};

struct SimulateArgs {
  std::string config_path;
  std::string checkpoint_path;
  std::string out_dir = ".";
  int paths = 10000;
  std::uint64_t seed = 1;
  double t0_hours = 0.0;
  double p0 = 0.0;
  double s0_mwh = 0.0 / 0.0;  // NaN = battery empty (soc_min)
  unsigned threads = 0;
};

struct PolicyArgs {
  std::string config_path;
  std::string checkpoint_path;
  std::string time_text;  // HH:MM or decimal hours
  double p = 0.0;
  double s_mwh = 0.0;
};

struct ReportArgs {
  std::string dir;
};

int run_calibrate(const CalibrateArgs& args, std::ostream& log);
int run_solve(const SolveArgs& args, std::ostream& log);
int run_simulate(const SimulateArgs& args, std::ostream& log);
int run_policy(const PolicyArgs& args, std::ostream& log);
int run_report(const ReportArgs& args, std::ostream& log);

}  // namespace pvsc::cli
