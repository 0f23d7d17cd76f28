#include "pvsc/battery.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pvsc {

ControlBounds admissible_box(double soc_mwh, const BatterySpec& spec,
                             double tolerance_mwh) {
  if (soc_mwh < spec.soc_min_mwh - tolerance_mwh ||
      soc_mwh > spec.soc_max_mwh + tolerance_mwh) {
    throw SocOutOfRange("admissible_box: soc " + std::to_string(soc_mwh) +
                        " outside tolerated band");
  }
  ControlBounds box{1.0, spec.max_discharge_mw};
  if (soc_mwh <= spec.soc_min_mwh + tolerance_mwh) box.max_discharge_mw = 0.0;
  if (soc_mwh >= spec.soc_max_mwh - tolerance_mwh) box.max_charge_fraction = 0.0;
  return box;
}

double soc_drift(const ControlAction& action, double pv_mw, const BatterySpec& spec) {
  return spec.eta_c * action.charge_fraction * pv_mw -
         action.discharge_mw / spec.eta_d;
}

SocStep step_soc(double soc_mwh, const ControlAction& action, double pv_mw,
                 double dt_hours, const BatterySpec& spec,
                 double clamp_tolerance_mwh) {
  constexpr double kSlack = 1e-12;
  if (action.charge_fraction < -kSlack || action.charge_fraction > 1.0 + kSlack) {
    throw InadmissibleAction("step_soc: charge fraction outside [0, 1]");
  }
  if (action.discharge_mw < -kSlack ||
      action.discharge_mw > spec.max_discharge_mw * (1.0 + 1e-9) + kSlack) {
    throw InadmissibleAction("step_soc: discharge outside [0, max_discharge]");
  }
  if (action.charge_fraction * pv_mw > spec.max_charge_mw * (1.0 + 1e-9) + kSlack) {
    throw InadmissibleAction("step_soc: a*P exceeds max charge power");
  }

  const double raw = soc_mwh + soc_drift(action, pv_mw, spec) * dt_hours;
  SocStep out;
  out.soc_mwh = std::clamp(raw, spec.soc_min_mwh, spec.soc_max_mwh);
  out.clamp_mwh = std::abs(raw - out.soc_mwh);
  if (out.clamp_mwh > clamp_tolerance_mwh) {
    throw InfeasibleStep("step_soc: clamp of " + std::to_string(out.clamp_mwh) +
                         " MWh exceeds tolerance");
  }
  return out;
}

ControlAction purify(const ControlAction& action, double pv_mw,
                     const BatterySpec& spec) {
  if (action.charge_fraction == 0.0 || action.discharge_mw == 0.0) return action;
  const double drift = soc_drift(action, pv_mw, spec);
  if (drift <= 0.0) {
    // Net drain: keep the drift on the discharge side only.
    return ControlAction{0.0, action.discharge_mw - spec.eta_c * spec.eta_d *
                                                        action.charge_fraction * pv_mw};
  }
  // Net fill (pv_mw > 0 here since the drift is positive).
  return ControlAction{action.charge_fraction -
                           action.discharge_mw / (spec.eta_c * spec.eta_d * pv_mw),
                       0.0};
}

}  // namespace pvsc
