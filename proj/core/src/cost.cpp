#include "pvsc/cost.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pvsc/parallel.hpp"
#include "pvsc/rng.hpp"

namespace pvsc {

double sold_power(double charge_fraction, double discharge_mw, double pv_mw) {
  return (1.0 - charge_fraction) * pv_mw + discharge_mw;
}

CostRate running_cost(double t_hours, double x, double d, double p,
                      const ControlAction& action, const ModelConfig& config) {
  const double price = price_level(config, t_hours, x);
  const double demand = demand_level(config, t_hours, d);
  const double pv = pv_level(config, t_hours, p);
  const double sold = sold_power(action.charge_fraction, action.discharge_mw, pv);
  const double disc = std::exp(-config.discount_rate * t_hours);
  CostRate rate;
  rate.gross = disc * price * (demand - sold);
  rate.incentive = disc * config.incentive_eur_mwh * std::min(demand, sold);
  rate.net = rate.gross - rate.incentive;
  return rate;
}

namespace {

struct Kahan {
  double sum = 0.0;
  double carry = 0.0;
  void add(double v) {
    const double y = v - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

McResult mc_cost(double t0, double x0, double d0, double p0, double s0,
                 const PolicyFunction& policy, const ModelConfig& config,
                 const TimeGrid& grid, int n_paths, std::uint64_t seed,
                 const McOptions& options) {
  if (n_paths < 1) throw std::invalid_argument("mc_cost: n_paths must be >= 1");
  if (std::abs(grid.start_hours - t0) > 1e-9 ||
      std::abs(grid.end() - config.horizon_hours) > 1e-6) {
    throw std::invalid_argument("mc_cost: grid must span [t0, T]");
  }
  const BatterySpec& b = config.battery;
  if (s0 < b.soc_min_mwh - 1e-12 || s0 > b.soc_max_mwh + 1e-12) {
    throw std::invalid_argument("mc_cost: s0 outside the SoC band");
  }

  const std::array<OuParams, 3> params{config.price_ou, config.demand_ou,
                                       config.pv_ou};
  const double dt = grid.step_hours;
  std::vector<double> totals(static_cast<std::size_t>(n_paths));

  // The seasonal curves and the discount factor depend on grid time only;
  // evaluating them once keeps the per-path loop cheap.
  std::vector<double> f_price(grid.count), f_demand(grid.count), f_pv(grid.count),
      discount(grid.count);
  for (int step = 0; step < grid.count; ++step) {
    const double t = grid.time(step);
    f_price[step] = seasonal_eval(config.price_seasonal, t);
    f_demand[step] = seasonal_eval(config.demand_seasonal, t);
    f_pv[step] = pv_seasonal_eval(config.pv_seasonal, t);
    discount[step] = std::exp(-config.discount_rate * t);
  }

  parallel_for(
      static_cast<std::size_t>(n_paths),
      [&](std::size_t path) {
        NormalSampler normal(derive_stream_seed(seed, path));
        std::array<double, 3> u{x0, d0, p0};
        double soc = s0;
        Kahan acc;
        for (int step = 0; step + 1 < grid.count; ++step) {
          const double t = grid.time(step);
          ControlAction action = policy(t, u[2], soc);
          if (!(action.charge_fraction >= -1e-12 &&
                action.charge_fraction <= 1.0 + 1e-12) ||
              !(action.discharge_mw >= -1e-12 &&
                action.discharge_mw <= b.max_discharge_mw * (1.0 + 1e-9) + 1e-12)) {
            throw PolicyViolation("mc_cost: policy action outside the control box at t=" +
                                  std::to_string(t));
          }
          const double pv = f_pv[step] * std::exp(u[2]);
          if (options.cap_to_band) {
            // A lattice policy can carry a*P slightly past the charge power
            // cap when looked up off-node; truncate like the band caps below.
            if (pv > 0.0 && action.charge_fraction * pv > b.max_charge_mw) {
              action.charge_fraction = b.max_charge_mw / pv;
            }
          } else if (action.charge_fraction * pv >
                     b.max_charge_mw * (1.0 + 1e-9) + 1e-12) {
            throw PolicyViolation("mc_cost: policy exceeds max charge power at t=" +
                                  std::to_string(t));
          }
          if (options.purify_actions) action = purify(action, pv, b);
          if (options.cap_to_band) {
            // Discharge no more energy than stored, store no more than fits.
            const double c_cap = std::max(0.0, (soc - b.soc_min_mwh) * b.eta_d / dt);
            action.discharge_mw = std::min(action.discharge_mw, c_cap);
            if (pv > 0.0 && action.charge_fraction > 0.0) {
              const double a_cap =
                  std::max(0.0, (b.soc_max_mwh - soc) / (b.eta_c * pv * dt));
              action.charge_fraction = std::min(action.charge_fraction, a_cap);
            }
          }
          const double price = f_price[step] * std::exp(u[0]);
          const double demand = f_demand[step] * std::exp(u[1]);
          const double sold =
              (1.0 - action.charge_fraction) * pv + action.discharge_mw;
          const double net = discount[step] *
                             (price * (demand - sold) -
                              config.incentive_eur_mwh * std::min(demand, sold));
          acc.add(net * dt);
          soc = step_soc(soc, action, pv, dt, b).soc_mwh;
          const std::array<double, 3> z{normal(), normal(), normal()};
          u = ou_step_exact(u, params, config.noise_corr, dt, z);
        }
        totals[path] = acc.sum;
      },
      options.threads);

  Kahan mean_acc;
  for (double v : totals) mean_acc.add(v);
  const double mean = mean_acc.sum / n_paths;
  Kahan var_acc;
  for (double v : totals) var_acc.add((v - mean) * (v - mean));
  const double variance = n_paths > 1 ? var_acc.sum / (n_paths - 1) : 0.0;

  McResult result;
  result.mean = mean;
  result.std_error = std::sqrt(variance / n_paths);
  result.n_paths = n_paths;
  if (options.keep_path_costs) result.path_costs = std::move(totals);
  return result;
}

}  // namespace pvsc
