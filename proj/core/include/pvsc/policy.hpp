#pragma once

#include <cstdint>
#include <vector>

#include "pvsc/battery.hpp"
#include "pvsc/model.hpp"

namespace pvsc {

// The four threshold quantities that partition the optimal-action regimes.
// charge* gauge the marginal cost of storing instant production, discharge*
// the marginal profit of selling stored power (EUR/MWh terms).
struct MarginalGauges {
  double charge = 0.0;            // eta_c Vs + e^{-rt} X
  double charge_incent = 0.0;     // eta_c Vs + e^{-rt} (X + Z)
  double discharge = 0.0;         // Vs/eta_d + e^{-rt} X
  double discharge_incent = 0.0;  // Vs/eta_d + e^{-rt} (X + Z)
};
MarginalGauges marginal_gauges(double t_hours, double price_eur_mwh,
                               double value_slope, const ModelConfig& config);

enum class Regime : std::uint8_t {
  kIdle = 0,
  kDischargeFull = 1,
  kChargeFull = 2,
  kMatchDemandByCharge = 3,
  kMatchDemandByDischarge = 4,
};
const char* to_string(Regime regime);

// Demand bracket relative to production: a: D = 0, b: 0 < D <= P,
// c: P <= D <= P + Gamma, d: D >= P + Gamma.
enum class DemandCase : std::uint8_t { kA = 0, kB = 1, kC = 2, kD = 3 };
const char* to_string(DemandCase demand_case);

struct PolicyDecision {
  ControlAction action;
  Regime regime = Regime::kIdle;
  DemandCase demand_case = DemandCase::kA;
  bool pv_positive = false;
  bool capped = false;  // charge fraction limited by max_charge_mw
};

// Objective minimized by the optimal action (EUR/hour):
//   (eta_c a P - c/eta_d) Vs + e^{-rt} (X (D - E) - Z min(D, E)).
double control_objective(double t_hours, double pv_mw, double demand_mw,
                         double price_eur_mwh, double value_slope,
                         const ControlAction& action, const ModelConfig& config);

struct Candidate {
  ControlAction action;
  Regime regime = Regime::kIdle;
  bool capped = false;
};

// The bang-bang candidate set at a node: idle, full discharge, full charge
// (capped by max charge power) and the two demand-matching actions, clipped
// to the control box. At most five entries.
std::vector<Candidate> candidate_actions(double pv_mw, double demand_mw,
                                         const BatterySpec& spec,
                                         const ControlBounds& box);

// Closed-form optimal action via the threshold ladder in -Vs. At the SoC
// boundaries the ladder is intersected with the admissible box by taking the
// objective-minimizing admissible candidate. Ties at exact threshold equality
// pick the action with less battery activity (idle, then demand-matching,
// then full action).
PolicyDecision analytic_policy(double t_hours, double pv_mw, double demand_mw,
                               double price_eur_mwh, double value_slope,
                               double soc_mwh, const ModelConfig& config);

// Dense-lattice argmin of the same objective over the admissible box,
// grid_n points per axis; ties broken by smallest a + c/Gamma. Serves as the
// independent oracle for analytic_policy and as the solver's fallback.
ControlAction brute_force_policy(double t_hours, double pv_mw, double demand_mw,
                                 double price_eur_mwh, double value_slope,
                                 double soc_mwh, const ModelConfig& config,
                                 int grid_n);

}  // namespace pvsc
