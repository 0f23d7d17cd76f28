#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "pvsc/battery.hpp"
#include "pvsc/model.hpp"
#include "pvsc/stochastic.hpp"

namespace pvsc {

// Discounted instantaneous cost decomposition, EUR/hour.
struct CostRate {
  double gross = 0.0;      // e^{-rt} X (D - E), purchases net of sales
  double incentive = 0.0;  // e^{-rt} Z min(D, E)
  double net = 0.0;        // gross - incentive
};

// E = (1 - a) P + c, the instantaneous power sold to the grid.
double sold_power(double charge_fraction, double discharge_mw, double pv_mw);

CostRate running_cost(double t_hours, double x, double d, double p,
                      const ControlAction& action, const ModelConfig& config);

// Feedback control evaluated along simulated paths.
using PolicyFunction =
    std::function<ControlAction(double t_hours, double log_pv, double soc_mwh)>;

struct PolicyViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct McOptions {
  // Replace simultaneous charge/discharge by the drift-equivalent pure action.
  bool purify_actions = true;
  // Truncate charge/discharge to the energy the SoC band can absorb/supply
  // within one step, keeping sold energy consistent with the stored energy.
  bool cap_to_band = true;
  unsigned threads = 0;
  bool keep_path_costs = false;
};

struct McResult {
  double mean = 0.0;       // EUR
  double std_error = 0.0;  // EUR
  int n_paths = 0;
  std::vector<double> path_costs;  // filled when keep_path_costs is set
};

// Monte Carlo cost of a policy: simulates (x, d, p) with exact OU transitions,
// applies the policy at each grid node, steps the SoC and accumulates the
// running cost by the left-endpoint rectangle rule. Path order and thread
// scheduling do not affect the result (per-path seeding, compensated sums).
McResult mc_cost(double t0, double x0, double d0, double p0, double s0,
                 const PolicyFunction& policy, const ModelConfig& config,
                 const TimeGrid& grid, int n_paths, std::uint64_t seed,
                 const McOptions& options = {});

}  // namespace pvsc
