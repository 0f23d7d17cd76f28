#include "pvsc/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pvsc {

MarginalGauges marginal_gauges(double t_hours, double price_eur_mwh,
                               double value_slope, const ModelConfig& config) {
  const double disc = std::exp(-config.discount_rate * t_hours);
  const double with_incent = price_eur_mwh + config.incentive_eur_mwh;
  MarginalGauges g;
  g.charge = config.battery.eta_c * value_slope + disc * price_eur_mwh;
  g.charge_incent = config.battery.eta_c * value_slope + disc * with_incent;
  g.discharge = value_slope / config.battery.eta_d + disc * price_eur_mwh;
  g.discharge_incent = value_slope / config.battery.eta_d + disc * with_incent;
  return g;
}

const char* to_string(Regime regime) {
  switch (regime) {
    case Regime::kIdle: return "idle";
    case Regime::kDischargeFull: return "dischargeFull";
    case Regime::kChargeFull: return "chargeFull";
    case Regime::kMatchDemandByCharge: return "matchDemandByCharge";
    case Regime::kMatchDemandByDischarge: return "matchDemandByDischarge";
  }
  return "?";
}

const char* to_string(DemandCase demand_case) {
  switch (demand_case) {
    case DemandCase::kA: return "a";
    case DemandCase::kB: return "b";
    case DemandCase::kC: return "c";
    case DemandCase::kD: return "d";
  }
  return "?";
}

double control_objective(double t_hours, double pv_mw, double demand_mw,
                         double price_eur_mwh, double value_slope,
                         const ControlAction& action, const ModelConfig& config) {
  const double drift = soc_drift(action, pv_mw, config.battery);
  const double sold = (1.0 - action.charge_fraction) * pv_mw + action.discharge_mw;
  const double disc = std::exp(-config.discount_rate * t_hours);
  return drift * value_slope +
         disc * (price_eur_mwh * (demand_mw - sold) -
                 config.incentive_eur_mwh * std::min(demand_mw, sold));
}

namespace {

// Less battery movement ranks first: idle, demand-matching, full action.
int activity_rank(Regime regime) {
  switch (regime) {
    case Regime::kIdle: return 0;
    case Regime::kMatchDemandByCharge:
    case Regime::kMatchDemandByDischarge: return 1;
    case Regime::kDischargeFull:
    case Regime::kChargeFull: return 2;
  }
  return 3;
}

}  // namespace

std::vector<Candidate> candidate_actions(double pv_mw, double demand_mw,
                                         const BatterySpec& spec,
                                         const ControlBounds& box) {
  std::vector<Candidate> out;
  out.reserve(5);
  out.push_back({ControlAction{0.0, 0.0}, Regime::kIdle, false});
  if (box.max_discharge_mw > 0.0) {
    out.push_back({ControlAction{0.0, box.max_discharge_mw},
                   Regime::kDischargeFull, false});
    const double c_match = demand_mw - pv_mw;
    if (c_match > 0.0 && c_match <= box.max_discharge_mw) {
      out.push_back({ControlAction{0.0, c_match},
                     Regime::kMatchDemandByDischarge, false});
    }
  }
  if (box.max_charge_fraction > 0.0 && pv_mw > 0.0) {
    const double a_cap = spec.max_charge_mw / pv_mw;
    const double a_full = std::min(1.0, a_cap);
    out.push_back({ControlAction{a_full, 0.0}, Regime::kChargeFull, a_cap < 1.0});
    if (demand_mw > 0.0 && demand_mw <= pv_mw) {
      const double a_match = 1.0 - demand_mw / pv_mw;
      if (a_match > 0.0) {
        out.push_back({ControlAction{std::min(a_match, a_cap), 0.0},
                       Regime::kMatchDemandByCharge, a_cap < a_match});
      }
    }
  }
  return out;
}

namespace {

PolicyDecision pick_admissible(double t, double pv, double demand, double price,
                               double vs, const ControlBounds& box,
                               const ModelConfig& config) {
  const auto candidates = candidate_actions(pv, demand, config.battery, box);
  PolicyDecision best;
  double best_value = std::numeric_limits<double>::infinity();
  int best_rank = 99;
  for (const auto& cand : candidates) {
    const double value = control_objective(t, pv, demand, price, vs, cand.action, config);
    const int rank = activity_rank(cand.regime);
    if (value < best_value || (value == best_value && rank < best_rank)) {
      best_value = value;
      best_rank = rank;
      best.action = cand.action;
      best.regime = cand.regime;
      best.capped = cand.capped;
    }
  }
  return best;
}

}  // namespace

PolicyDecision analytic_policy(double t_hours, double pv_mw, double demand_mw,
                               double price_eur_mwh, double value_slope,
                               double soc_mwh, const ModelConfig& config) {
  const BatterySpec& b = config.battery;
  const double disc = std::exp(-config.discount_rate * t_hours);
  const double with_incent = price_eur_mwh + config.incentive_eur_mwh;
  const double thr_discharge = disc * b.eta_d * price_eur_mwh;          // eta_d X
  const double thr_discharge_z = disc * b.eta_d * with_incent;          // eta_d (X+Z)
  const double thr_charge = disc * price_eur_mwh / b.eta_c;             // X / eta_c
  const double thr_charge_z = disc * with_incent / b.eta_c;             // (X+Z) / eta_c
  const double m = -value_slope;
  const double gamma = b.max_discharge_mw;

  PolicyDecision dec;
  dec.pv_positive = pv_mw > 0.0;

  // Threshold ladder for interior SoC. Non-strict comparisons realize the
  // tie rule: at exact equality the less active rung wins.
  if (pv_mw > 0.0) {
    if (demand_mw <= 0.0) {
      dec.demand_case = DemandCase::kA;
      if (m < thr_discharge) {
        dec.regime = Regime::kDischargeFull;
        dec.action = {0.0, gamma};
      } else if (m <= thr_charge) {
        dec.regime = Regime::kIdle;
      } else {
        dec.regime = Regime::kChargeFull;
        dec.action = {1.0, 0.0};
      }
    } else if (demand_mw <= pv_mw) {
      dec.demand_case = DemandCase::kB;
      if (m < thr_discharge) {
        dec.regime = Regime::kDischargeFull;
        dec.action = {0.0, gamma};
      } else if (m <= thr_charge) {
        dec.regime = Regime::kIdle;
      } else if (m <= thr_charge_z) {
        dec.regime = Regime::kMatchDemandByCharge;
        dec.action = {1.0 - demand_mw / pv_mw, 0.0};
      } else {
        dec.regime = Regime::kChargeFull;
        dec.action = {1.0, 0.0};
      }
    } else if (demand_mw <= pv_mw + gamma) {
      dec.demand_case = DemandCase::kC;
      if (m < thr_discharge) {
        dec.regime = Regime::kDischargeFull;
        dec.action = {0.0, gamma};
      } else if (m < thr_discharge_z) {
        dec.regime = Regime::kMatchDemandByDischarge;
        dec.action = {0.0, demand_mw - pv_mw};
      } else if (m <= thr_charge_z) {
        dec.regime = Regime::kIdle;
      } else {
        dec.regime = Regime::kChargeFull;
        dec.action = {1.0, 0.0};
      }
    } else {
      dec.demand_case = DemandCase::kD;
      if (m < thr_discharge_z) {
        dec.regime = Regime::kDischargeFull;
        dec.action = {0.0, gamma};
      } else if (m <= thr_charge_z) {
        dec.regime = Regime::kIdle;
      } else {
        dec.regime = Regime::kChargeFull;
        dec.action = {1.0, 0.0};
      }
    }
    // Charge power cap (binding when the plant outsizes the battery).
    const double a_cap = b.max_charge_mw / pv_mw;
    if (dec.action.charge_fraction > a_cap) {
      dec.action.charge_fraction = a_cap;
      dec.capped = true;
    }
  } else {
    // No production: a stays 0 and the charge rungs disappear.
    if (demand_mw <= 0.0) {
      dec.demand_case = DemandCase::kA;
      if (m < thr_discharge) {
        dec.regime = Regime::kDischargeFull;
        dec.action = {0.0, gamma};
      } else {
        dec.regime = Regime::kIdle;
      }
    } else if (demand_mw <= gamma) {
      dec.demand_case = DemandCase::kC;
      if (m < thr_discharge) {
        dec.regime = Regime::kDischargeFull;
        dec.action = {0.0, gamma};
      } else if (m < thr_discharge_z) {
        dec.regime = Regime::kMatchDemandByDischarge;
        dec.action = {0.0, demand_mw};
      } else {
        dec.regime = Regime::kIdle;
      }
    } else {
      dec.demand_case = DemandCase::kD;
      if (m < thr_discharge_z) {
        dec.regime = Regime::kDischargeFull;
        dec.action = {0.0, gamma};
      } else {
        dec.regime = Regime::kIdle;
      }
    }
  }

  // Intersect with the admissible box; at the SoC boundaries fall back to the
  // best admissible candidate.
  const double span = b.soc_max_mwh - b.soc_min_mwh;
  const ControlBounds box = admissible_box(soc_mwh, b, 1e-9 * span);
  if ((dec.action.charge_fraction > 0.0 && box.max_charge_fraction == 0.0) ||
      (dec.action.discharge_mw > 0.0 && box.max_discharge_mw == 0.0)) {
    PolicyDecision fallback = pick_admissible(t_hours, pv_mw, demand_mw,
                                              price_eur_mwh, value_slope, box, config);
    fallback.demand_case = dec.demand_case;
    fallback.pv_positive = dec.pv_positive;
    dec = fallback;
  }

  if (dec.action.charge_fraction == 0.0 && dec.action.discharge_mw == 0.0) {
    dec.regime = Regime::kIdle;
  }
  return dec;
}

ControlAction brute_force_policy(double t_hours, double pv_mw, double demand_mw,
                                 double price_eur_mwh, double value_slope,
                                 double soc_mwh, const ModelConfig& config,
                                 int grid_n) {
  if (grid_n < 2) throw std::invalid_argument("brute_force_policy: grid_n must be >= 2");
  const BatterySpec& b = config.battery;
  const ControlBounds box =
      admissible_box(soc_mwh, b, 1e-9 * (b.soc_max_mwh - b.soc_min_mwh));

  double a_hi = 0.0;
  if (box.max_charge_fraction > 0.0 && pv_mw > 0.0) {
    a_hi = std::min(1.0, b.max_charge_mw / pv_mw);
  }
  const double c_hi = box.max_discharge_mw;
  const int a_steps = a_hi > 0.0 ? grid_n : 1;
  const int c_steps = c_hi > 0.0 ? grid_n : 1;

  const double disc = std::exp(-config.discount_rate * t_hours);
  ControlAction best{0.0, 0.0};
  double best_value = std::numeric_limits<double>::infinity();
  double best_movement = std::numeric_limits<double>::infinity();
  for (int i = 0; i < a_steps; ++i) {
    const double a = a_steps > 1 ? a_hi * i / (a_steps - 1) : 0.0;
    const double drift_a = b.eta_c * a * pv_mw;
    const double sold_a = (1.0 - a) * pv_mw;
    for (int j = 0; j < c_steps; ++j) {
      const double c = c_steps > 1 ? c_hi * j / (c_steps - 1) : 0.0;
      const double sold = sold_a + c;
      const double value = (drift_a - c / b.eta_d) * value_slope +
                           disc * (price_eur_mwh * (demand_mw - sold) -
                                   config.incentive_eur_mwh * std::min(demand_mw, sold));
      const double movement = a + c / b.max_discharge_mw;
      if (value < best_value ||
          (value == best_value && movement < best_movement)) {
        best_value = value;
        best_movement = movement;
        best = {a, c};
      }
    }
  }
  return best;
}

}  // namespace pvsc
