#include "pvsc/presets.hpp"

#include <cmath>

namespace pvsc::presets {

namespace {

// Daily, half-daily and third-of-day frequencies (1/hour).
constexpr double kF1 = 1.0 / 24.0;
constexpr double kF2 = 1.0 / 12.0;
constexpr double kF3 = 1.0 / 8.0;

// The demand intercept pins the curve minimum at the observed 0.1418 MW
// night trough.
constexpr double kDemandMinMw = 0.1418;

}  // namespace

ModelConfig it2023_single_battery() {
  ModelConfig config;

  config.price_seasonal.intercept = std::log(150.0);
  config.price_seasonal.harmonics = {
      {kF1, -0.30068, -0.09365},
      {kF2, -0.21155, 0.09567},
      {kF3, 0.07929, 0.07220},
  };

  config.demand_seasonal.harmonics = {
      {kF1, -0.21109, -0.10399},
      {kF2, -0.12501, 0.0},
      {kF3, 0.02541, 0.0},
  };
  config.demand_seasonal.intercept =
      intercept_for_min(config.demand_seasonal.harmonics, kDemandMinMw);

  config.pv_seasonal.amplitude_mw = 0.5;
  config.pv_seasonal.frequency = kF1;
  config.pv_seasonal.phase_hours = 18.0;

  // PV log-level reverts at 2/day with volatility 0.3/sqrt(day), converted
  // to hour units. Price and demand stay deterministic.
  config.pv_ou.mean_reversion = 2.0 / 24.0;
  config.pv_ou.volatility = 0.3 / std::sqrt(24.0);
  config.price_ou = {};
  config.demand_ou = {};

  config.battery.eta_c = 0.99;
  config.battery.eta_d = 0.97;
  config.battery.max_charge_mw = 0.01;
  config.battery.max_discharge_mw = 0.028;
  config.battery.soc_min_mwh = 0.0;
  config.battery.soc_max_mwh = 0.03;

  config.incentive_eur_mwh = 110.0;
  config.discount_rate = 0.0;
  config.fixed_log_price = 0.0;
  config.fixed_log_demand = 0.0;
  config.horizon_hours = 24.0;
  return config;
}

ModelConfig it2023_two_battery() {
  ModelConfig config = it2023_single_battery();
  config.battery.max_charge_mw *= 2.0;
  config.battery.max_discharge_mw *= 2.0;
  config.battery.soc_max_mwh *= 2.0;
  return config;
}

SolverGrid default_grid(const ModelConfig& config) {
  return make_solver_grid(config, 0.024, -0.6, 0.6, 0.04, 0.005);
}

}  // namespace pvsc::presets
