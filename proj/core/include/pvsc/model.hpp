#pragma once

#include <array>
#include <stdexcept>
#include <vector>

namespace pvsc {

// One sinusoidal component of a log-level seasonal curve.
struct Harmonic {
  double frequency = 0.0;  // cycles per hour
  double sine_amp = 0.0;
  double cosine_amp = 0.0;
};

// Strictly positive daily curve exp(intercept + sum of harmonics).
struct SeasonalSpec {
  double intercept = 0.0;  // log level
  std::vector<Harmonic> harmonics;
};

// Clamped-sine production profile amplitude * max(sin(2 pi f (t + phase)), 0):
// zero on the half period where the sine is negative.
struct PvSeasonalSpec {
  double amplitude_mw = 0.0;
  double frequency = 1.0 / 24.0;  // cycles per hour
  double phase_hours = 0.0;
};

struct OuParams {
  double mean_reversion = 0.0;  // 1/hour
  double volatility = 0.0;      // 1/sqrt(hour)
};

struct BatterySpec {
  double eta_c = 0.99;              // charge efficiency
  double eta_d = 0.97;              // discharge efficiency
  double max_charge_mw = 0.01;      // cap on the stored PV power a*P
  double max_discharge_mw = 0.028;  // discharge power bound
  double soc_min_mwh = 0.0;
  double soc_max_mwh = 0.03;
};

// All market, process, battery, incentive and discount parameters. Time is in
// hours throughout; EUR/MWh times MW integrates over hours directly to EUR.
struct ModelConfig {
  SeasonalSpec price_seasonal;   // f_x, EUR/MWh after exp
  SeasonalSpec demand_seasonal;  // f_d, MW after exp
  PvSeasonalSpec pv_seasonal;    // f_p, MW
  OuParams price_ou;
  OuParams demand_ou;
  OuParams pv_ou;
  // Lower-triangular factor applied to iid unit normals, component order
  // (price, demand, pv). Identity = independent noise.
  std::array<std::array<double, 3>, 3> noise_corr{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  BatterySpec battery;
  double incentive_eur_mwh = 0.0;  // Z
  double discount_rate = 0.0;      // r, 1/hour
  double fixed_log_price = 0.0;    // x
  double fixed_log_demand = 0.0;   // d
  double horizon_hours = 24.0;     // T
};

struct DegenerateParameters : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double seasonal_eval(const SeasonalSpec& spec, double t_hours);
double pv_seasonal_eval(const PvSeasonalSpec& spec, double t_hours);

// E[f_p(u) e^{U_p(u)} | U_p(t0) = p0] under the exact OU transition. Requires
// mean_reversion > 0; throws DegenerateParameters otherwise.
double expected_pv(const PvSeasonalSpec& spec, const OuParams& ou, double t0,
                   double p0, double u);

// Extremes of a seasonal curve over one 24 h day.
struct CurveExtrema {
  double t_min = 0.0;
  double t_max = 0.0;
  double min_value = 0.0;
  double max_value = 0.0;
};
CurveExtrema seasonal_extrema(const SeasonalSpec& spec);

// Intercept such that min_t exp(intercept + harmonics(t)) == target_min.
double intercept_for_min(const std::vector<Harmonic>& harmonics, double target_min);

// State-to-level maps X = f_x e^x, D = f_d e^d, P = f_p e^p.
double price_level(const ModelConfig& config, double t_hours, double x);
double demand_level(const ModelConfig& config, double t_hours, double d);
double pv_level(const ModelConfig& config, double t_hours, double p);

// Throws std::invalid_argument when an invariant is broken.
void validate(const ModelConfig& config);

// True when price and demand noise are switched off, i.e. X and D are
// deterministic functions of time and only (P, S) remain stochastic.
bool is_two_state(const ModelConfig& config);

}  // namespace pvsc
