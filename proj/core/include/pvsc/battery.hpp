#pragma once

#include <limits>
#include <stdexcept>

#include "pvsc/model.hpp"

namespace pvsc {

// Joint decision: fraction a of the PV power stored and battery discharge
// power c sold to the grid.
struct ControlAction {
  double charge_fraction = 0.0;  // a in [0, 1]
  double discharge_mw = 0.0;     // c in [0, max_discharge_mw]
};

struct ControlBounds {
  double max_charge_fraction = 0.0;  // 0 or 1
  double max_discharge_mw = 0.0;     // 0 or max_discharge_mw
};

struct SocOutOfRange : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InadmissibleAction : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InfeasibleStep : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Control box at state-of-charge s: within tolerance of the lower bound only
// charging is allowed, within tolerance of the upper bound only discharging.
// Throws SocOutOfRange outside [soc_min - tol, soc_max + tol].
ControlBounds admissible_box(double soc_mwh, const BatterySpec& spec,
                             double tolerance_mwh);

// SoC drift eta_c a P - c / eta_d in MW.
double soc_drift(const ControlAction& action, double pv_mw, const BatterySpec& spec);

struct SocStep {
  double soc_mwh = 0.0;
  double clamp_mwh = 0.0;  // how far the raw update fell outside the band
};

// Advances the state of charge by dt. The raw update is clamped to
// [soc_min, soc_max]; a clamp larger than clamp_tolerance_mwh throws
// InfeasibleStep. Static bound violations (a, c, a*P) throw
// InadmissibleAction.
SocStep step_soc(double soc_mwh, const ControlAction& action, double pv_mw,
                 double dt_hours, const BatterySpec& spec,
                 double clamp_tolerance_mwh = std::numeric_limits<double>::infinity());

// Rewrites a simultaneous charge/discharge action as an equivalent one with
// a * c == 0: the SoC drift is preserved exactly and the power sold never
// decreases (strictly increases when a c > 0 and eta_c eta_d < 1).
ControlAction purify(const ControlAction& action, double pv_mw, const BatterySpec& spec);

}  // namespace pvsc
