#pragma once

#include <unistd.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pvsc/model.hpp"
#include "pvsc/rng.hpp"
#include "pvsc/stochastic.hpp"

namespace pvsc::testing {

// Flat price X, flat demand D, no production, no incentive. Demand of zero is
// expressed as a log intercept of -700 (the curve is positive by
// construction, ~1e-304 MW is zero for every tolerance in use).
inline ModelConfig flat_config(double price_eur_mwh, double demand_mw,
                               const BatterySpec& battery) {
  ModelConfig config;
  config.price_seasonal.intercept = std::log(price_eur_mwh);
  config.demand_seasonal.intercept = demand_mw > 0.0 ? std::log(demand_mw) : -700.0;
  config.pv_seasonal.amplitude_mw = 0.0;
  config.battery = battery;
  return config;
}

inline BatterySpec lithium_unit() {
  return BatterySpec{0.99, 0.97, 0.01, 0.028, 0.0, 0.03};
}

// Left-endpoint rectangle quadrature, the same rule the path accumulator
// uses. Independent of the cost module.
template <typename F>
double rectangle_quadrature(const F& integrand, double t0, double t1, int steps) {
  double acc = 0.0;
  const double dt = (t1 - t0) / steps;
  for (int i = 0; i < steps; ++i) acc += integrand(t0 + i * dt) * dt;
  return acc;
}

// Exponential-OU series value = exp(log_curve(t) + U(t)) sampled uniformly,
// with U started from its stationary law.
template <typename Curve>
SeriesSample synthetic_series(const Curve& log_curve, const OuParams& ou,
                              double dt_hours, int count, std::uint64_t seed) {
  NormalSampler normal(seed);
  const double stationary_sd =
      ou.mean_reversion > 0.0
          ? ou.volatility / std::sqrt(2.0 * ou.mean_reversion)
          : 0.0;
  double u = stationary_sd * normal();
  const double decay = std::exp(-ou.mean_reversion * dt_hours);
  const double step_sd =
      ou.mean_reversion > 0.0
          ? ou.volatility *
                std::sqrt(-std::expm1(-2.0 * ou.mean_reversion * dt_hours) /
                          (2.0 * ou.mean_reversion))
          : ou.volatility * std::sqrt(dt_hours);
  SeriesSample sample;
  sample.t_hours.reserve(count);
  sample.values.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double t = dt_hours * i;
    sample.t_hours.push_back(t);
    sample.values.push_back(std::exp(log_curve(t) + u));
    u = u * decay + step_sd * normal();
  }
  return sample;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("pvsc_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  std::string str() const { return path_.string(); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace pvsc::testing
