#include <doctest.h>

#include <cmath>

#include "pvsc/cost.hpp"
#include "pvsc/presets.hpp"
#include "support.hpp"

using namespace pvsc;
using pvsc::testing::flat_config;
using pvsc::testing::lithium_unit;
using pvsc::testing::rectangle_quadrature;

TEST_CASE("sold_power hand values") {
  CHECK(sold_power(1.0, 0.0, 0.37) == 0.0);
  CHECK(sold_power(0.0, 0.028, 0.5) == doctest::Approx(0.528));
  CHECK(sold_power(0.5, 0.0, 0.5) == doctest::Approx(0.25));
}

TEST_CASE("running_cost decomposition") {
  BatterySpec big = lithium_unit();
  big.max_discharge_mw = 0.5;

  SUBCASE("balanced sale with no incentive nets zero") {
    ModelConfig config = flat_config(100.0, 0.2, big);
    const CostRate rate = running_cost(3.0, 0.0, 0.0, 0.0, {0.0, 0.2}, config);
    CHECK(rate.net == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("incentive outweighs the purchase when min binds at E") {
    ModelConfig config = flat_config(100.0, 0.2, big);
    config.incentive_eur_mwh = 110.0;
    const CostRate rate = running_cost(5.0, 0.0, 0.0, 0.0, {0.0, 0.1}, config);
    CHECK(rate.gross == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(rate.incentive == doctest::Approx(11.0).epsilon(1e-12));
    CHECK(rate.net == doctest::Approx(-1.0).epsilon(1e-12));
  }
  SUBCASE("selling past demand caps the incentive at D") {
    ModelConfig config = flat_config(100.0, 0.2, big);
    config.incentive_eur_mwh = 110.0;
    const CostRate rate = running_cost(5.0, 0.0, 0.0, 0.0, {0.0, 0.3}, config);
    CHECK(rate.gross == doctest::Approx(-10.0).epsilon(1e-12));
    CHECK(rate.incentive == doctest::Approx(22.0).epsilon(1e-12));
    CHECK(rate.net == doctest::Approx(-32.0).epsilon(1e-12));
  }
  SUBCASE("net always equals gross minus incentive") {
    ModelConfig config = presets::it2023_two_battery();
    for (int i = 0; i < 100; ++i) {
      const double t = 0.24 * i;
      const CostRate rate =
          running_cost(t, 0.1, -0.2, 0.3, {0.4, 0.01}, config);
      CHECK(rate.net == rate.gross - rate.incentive);
      CHECK(rate.incentive >= 0.0);
    }
  }
}

TEST_CASE("net cost rate is piecewise linear in c with a single kink at D = E") {
  BatterySpec big = lithium_unit();
  big.max_discharge_mw = 0.5;
  ModelConfig config = flat_config(100.0, 0.2, big);
  config.incentive_eur_mwh = 110.0;
  // E = c here (no production); the kink sits at c = D = 0.2.
  const auto net = [&config](double c) {
    return running_cost(3.0, 0.0, 0.0, 0.0, {0.0, c}, config).net;
  };
  const double below = net(0.10) - net(0.05);
  const double below2 = net(0.15) - net(0.10);
  const double above = net(0.30) - net(0.25);
  const double above2 = net(0.35) - net(0.30);
  CHECK(below == doctest::Approx(below2).epsilon(1e-12));
  CHECK(above == doctest::Approx(above2).epsilon(1e-12));
  CHECK(std::abs(below - above) > 1e-6);  // slopes differ across the kink
  CHECK(below == doctest::Approx(0.05 * -(100.0 + 110.0)).epsilon(1e-12));
  CHECK(above == doctest::Approx(0.05 * -100.0).epsilon(1e-12));
}

TEST_CASE("mc_cost drains a full battery into a flat price exactly") {
  ModelConfig config = flat_config(100.0, 0.0, lithium_unit());
  config.pv_ou = {2.0 / 24.0, 0.3 / std::sqrt(24.0)};  // irrelevant with A = 0
  const TimeGrid grid{0.0, 0.024, 1001};
  const PolicyFunction always_discharge = [](double, double, double) {
    return ControlAction{0.0, 0.028};
  };
  const McResult result = mc_cost(0.0, 0.0, 0.0, 0.0, config.battery.soc_max_mwh,
                                  always_discharge, config, grid, 8, 99);
  CHECK(result.mean == doctest::Approx(-100.0 * 0.97 * 0.03).epsilon(1e-9));
  CHECK(result.std_error == doctest::Approx(0.0));
}

TEST_CASE("mc_cost do-nothing equals the deterministic purchase quadrature") {
  ModelConfig config = presets::it2023_single_battery();
  config.pv_seasonal.amplitude_mw = 0.0;
  config.incentive_eur_mwh = 0.0;
  config.discount_rate = 0.01;
  const int steps = 1000;
  const TimeGrid grid{0.0, 24.0 / steps, steps + 1};
  const PolicyFunction idle = [](double, double, double) { return ControlAction{}; };
  const McResult result = mc_cost(0.0, 0.0, 0.0, 0.0, 0.01, idle, config, grid, 4, 7);

  const double oracle = rectangle_quadrature(
      [&config](double t) {
        return std::exp(-config.discount_rate * t) *
               seasonal_eval(config.price_seasonal, t) *
               seasonal_eval(config.demand_seasonal, t);
      },
      0.0, 24.0, steps);
  CHECK(std::abs(result.mean - oracle) < 1e-6 * std::abs(oracle));
}

TEST_CASE("mc_cost determinism and scheduling independence") {
  ModelConfig config = presets::it2023_single_battery();
  const TimeGrid grid{0.0, 0.12, 201};
  const PolicyFunction greedy = [](double, double, double soc) {
    return soc > 0.005 ? ControlAction{0.0, 0.028} : ControlAction{};
  };
  McOptions one_thread;
  one_thread.threads = 1;
  McOptions two_threads;
  two_threads.threads = 2;
  const McResult a =
      mc_cost(0.0, 0.0, 0.0, 0.0, 0.02, greedy, config, grid, 512, 31, one_thread);
  const McResult b =
      mc_cost(0.0, 0.0, 0.0, 0.0, 0.02, greedy, config, grid, 512, 31, two_threads);
  CHECK(a.mean == b.mean);
  CHECK(a.std_error == b.std_error);
  const McResult c =
      mc_cost(0.0, 0.0, 0.0, 0.0, 0.02, greedy, config, grid, 512, 32, one_thread);
  CHECK(a.mean != c.mean);
}

TEST_CASE("mc_cost rejects out-of-box policies") {
  ModelConfig config = presets::it2023_single_battery();
  const TimeGrid grid{0.0, 0.24, 101};
  const PolicyFunction bad = [](double, double, double) {
    return ControlAction{0.0, 1.0};  // far above max discharge
  };
  CHECK_THROWS_AS(mc_cost(0.0, 0.0, 0.0, 0.0, 0.01, bad, config, grid, 2, 5),
                  PolicyViolation);
}

TEST_CASE("purification dominance holds path by path under common random numbers") {
  ModelConfig config = presets::it2023_single_battery();
  // Mixed charging/discharging for one midday hour; magnitudes small enough
  // that the SoC band never caps the action.
  const PolicyFunction mixed = [&config](double t, double log_pv, double) {
    if (t < 12.0 || t >= 13.0) return ControlAction{};
    const double pv = pv_level(config, t, log_pv);
    const double a = pv > 0.0 ? std::min(0.5, config.battery.max_charge_mw / pv) : 0.0;
    return ControlAction{a, 0.5 * config.battery.max_discharge_mw};
  };
  const TimeGrid grid{0.0, 0.024, 1001};
  McOptions raw;
  raw.purify_actions = false;
  raw.keep_path_costs = true;
  McOptions purified;
  purified.purify_actions = true;
  purified.keep_path_costs = true;

  const int n_paths = 400;
  const McResult with_mixed =
      mc_cost(0.0, 0.0, 0.0, 0.0, 0.015, mixed, config, grid, n_paths, 404, raw);
  const McResult with_pure =
      mc_cost(0.0, 0.0, 0.0, 0.0, 0.015, mixed, config, grid, n_paths, 404, purified);

  REQUIRE(with_mixed.path_costs.size() == with_pure.path_costs.size());
  int strictly_better = 0;
  for (std::size_t i = 0; i < with_mixed.path_costs.size(); ++i) {
    CHECK(with_pure.path_costs[i] <= with_mixed.path_costs[i] + 1e-10);
    if (with_pure.path_costs[i] < with_mixed.path_costs[i]) ++strictly_better;
  }
  // eta_c eta_d < 1 and the mixed window has production, so the proposition's
  // strict clause applies on every path.
  CHECK(strictly_better == n_paths);
}
