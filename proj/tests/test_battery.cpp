#include <doctest.h>

#include <cmath>
#include <random>

#include "pvsc/battery.hpp"
#include "support.hpp"

using namespace pvsc;
using pvsc::testing::lithium_unit;

TEST_CASE("admissible_box branches") {
  const BatterySpec spec = lithium_unit();
  const double tol = 1e-9;

  const ControlBounds at_min = admissible_box(spec.soc_min_mwh, spec, tol);
  CHECK(at_min.max_charge_fraction == 1.0);
  CHECK(at_min.max_discharge_mw == 0.0);

  const ControlBounds mid = admissible_box(0.015, spec, tol);
  CHECK(mid.max_charge_fraction == 1.0);
  CHECK(mid.max_discharge_mw == spec.max_discharge_mw);

  const ControlBounds at_max = admissible_box(spec.soc_max_mwh, spec, tol);
  CHECK(at_max.max_charge_fraction == 0.0);
  CHECK(at_max.max_discharge_mw == spec.max_discharge_mw);

  CHECK_THROWS_AS(admissible_box(spec.soc_max_mwh + 1e-3, spec, tol), SocOutOfRange);
  CHECK_THROWS_AS(admissible_box(spec.soc_min_mwh - 1e-3, spec, tol), SocOutOfRange);

  // A wider tolerance band widens both boundary zones.
  const ControlBounds near_min = admissible_box(0.002, spec, 0.0025);
  CHECK(near_min.max_discharge_mw == 0.0);
}

TEST_CASE("step_soc hand-computed values") {
  const BatterySpec spec = lithium_unit();

  SUBCASE("idle keeps the state") {
    const SocStep out = step_soc(0.0123, ControlAction{}, 0.4, 1.0, spec);
    CHECK(out.soc_mwh == 0.0123);
    CHECK(out.clamp_mwh == 0.0);
  }
  SUBCASE("full charge of a small production") {
    const SocStep out = step_soc(0.01, ControlAction{1.0, 0.0}, 0.005, 1.0, spec);
    CHECK(out.soc_mwh == doctest::Approx(0.01495).epsilon(1e-12));
    CHECK(out.clamp_mwh == 0.0);
  }
  SUBCASE("one hour of full discharge from the top") {
    // 0.03 - 0.028/0.97 = 0.0011340... stays inside the band, no clamp.
    const SocStep out = step_soc(0.03, ControlAction{0.0, 0.028}, 0.0, 1.0, spec);
    CHECK(out.soc_mwh == doctest::Approx(0.03 - 0.028 / 0.97).epsilon(1e-12));
    CHECK(out.clamp_mwh == 0.0);
  }
  SUBCASE("draining past the bottom clamps and can signal") {
    const SocStep out = step_soc(0.005, ControlAction{0.0, 0.028}, 0.0, 1.0, spec);
    CHECK(out.soc_mwh == spec.soc_min_mwh);
    CHECK(out.clamp_mwh == doctest::Approx(0.028 / 0.97 - 0.005).epsilon(1e-12));
    CHECK_THROWS_AS(step_soc(0.005, ControlAction{0.0, 0.028}, 0.0, 1.0, spec, 0.0025),
                    InfeasibleStep);
  }
  SUBCASE("static bounds are enforced") {
    CHECK_THROWS_AS(step_soc(0.01, ControlAction{1.5, 0.0}, 0.1, 1.0, spec),
                    InadmissibleAction);
    CHECK_THROWS_AS(step_soc(0.01, ControlAction{0.0, 0.05}, 0.0, 1.0, spec),
                    InadmissibleAction);
    // a * P above the charge power cap
    CHECK_THROWS_AS(step_soc(0.01, ControlAction{1.0, 0.0}, 0.5, 1.0, spec),
                    InadmissibleAction);
  }
}

TEST_CASE("purify hand-computed values") {
  const BatterySpec spec = lithium_unit();

  SUBCASE("pure actions pass through") {
    const ControlAction charge{0.4, 0.0};
    const ControlAction out = purify(charge, 0.01, spec);
    CHECK(out.charge_fraction == 0.4);
    CHECK(out.discharge_mw == 0.0);
  }
  SUBCASE("net drain moves everything to the discharge side") {
    const ControlAction out = purify(ControlAction{0.5, 0.02}, 0.01, spec);
    CHECK(out.charge_fraction == 0.0);
    CHECK(out.discharge_mw == doctest::Approx(0.0151985).epsilon(1e-12));
  }
  SUBCASE("net fill with unit efficiencies keeps sold power exactly") {
    BatterySpec ideal = spec;
    ideal.eta_c = ideal.eta_d = 1.0;
    const ControlAction out = purify(ControlAction{0.9, 0.001}, 0.01, ideal);
    CHECK(out.charge_fraction == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(out.discharge_mw == 0.0);
    const double sold_before = (1.0 - 0.9) * 0.01 + 0.001;
    const double sold_after = (1.0 - out.charge_fraction) * 0.01;
    CHECK(sold_after == doctest::Approx(sold_before).epsilon(1e-12));
  }
}

TEST_CASE("purify preserves drift and never reduces sold power") {
  const BatterySpec spec = lithium_unit();
  std::mt19937_64 rng(52025ull);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 5000; ++trial) {
    const double pv = trial % 7 == 0 ? 0.0 : 0.6 * unit(rng);
    const ControlAction mixed{unit(rng), spec.max_discharge_mw * unit(rng)};
    const ControlAction pure = purify(mixed, pv, spec);

    CHECK(pure.charge_fraction * pure.discharge_mw == 0.0);
    CHECK(pure.charge_fraction >= -1e-15);
    CHECK(pure.discharge_mw >= -1e-15);

    const double drift_before = soc_drift(mixed, pv, spec);
    const double drift_after = soc_drift(pure, pv, spec);
    CHECK(std::abs(drift_after - drift_before) <=
          1e-12 * std::max(1.0, std::abs(drift_before)));

    const double sold_before =
        (1.0 - mixed.charge_fraction) * pv + mixed.discharge_mw;
    const double sold_after = (1.0 - pure.charge_fraction) * pv + pure.discharge_mw;
    CHECK(sold_after >= sold_before - 1e-15);
    if (mixed.charge_fraction * mixed.discharge_mw > 0.0 && pv > 0.0) {
      CHECK(sold_after > sold_before);  // eta_c eta_d < 1 here
    }
  }
}

TEST_CASE("step_soc is affine in the action before clamping") {
  const BatterySpec spec = lithium_unit();
  const double s = 0.015, pv = 0.008, dt = 0.3;
  const ControlAction a1{0.2, 0.004};
  const ControlAction a2{0.8, 0.012};
  const ControlAction mid{0.5 * (a1.charge_fraction + a2.charge_fraction),
                          0.5 * (a1.discharge_mw + a2.discharge_mw)};
  const double lhs = step_soc(s, mid, pv, dt, spec).soc_mwh;
  const double rhs = 0.5 * (step_soc(s, a1, pv, dt, spec).soc_mwh +
                            step_soc(s, a2, pv, dt, spec).soc_mwh);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-14));
}

TEST_CASE("iterated steps with box-respecting actions keep the state in band") {
  const BatterySpec spec = lithium_unit();
  const double dt = 0.024;
  const double cell = 0.005;
  std::mt19937_64 rng(11311ull);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double s = 0.01;
  for (int step = 0; step < 5000; ++step) {
    const double pv = 0.02 * unit(rng);
    const ControlBounds box = admissible_box(s, spec, cell / 2.0);
    ControlAction action{box.max_charge_fraction * unit(rng),
                         box.max_discharge_mw * unit(rng)};
    if (pv > 0.0) {
      action.charge_fraction =
          std::min(action.charge_fraction, spec.max_charge_mw / pv);
    }
    const SocStep out = step_soc(s, action, pv, dt, spec, cell / 2.0);
    s = out.soc_mwh;
    CHECK(s >= spec.soc_min_mwh);
    CHECK(s <= spec.soc_max_mwh);
    CHECK(out.clamp_mwh <= cell / 2.0);
  }
}
