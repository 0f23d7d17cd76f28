#include "pvsc/model.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace pvsc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double harmonic_sum(const std::vector<Harmonic>& harmonics, double t) {
  double acc = 0.0;
  for (const auto& h : harmonics) {
    const double w = kTwoPi * h.frequency * t;
    acc += h.sine_amp * std::sin(w) + h.cosine_amp * std::cos(w);
  }
  return acc;
}

// Golden-section refinement of a bracketed extremum.
template <typename F>
double golden_min(const F& f, double lo, double hi) {
  constexpr double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > 1e-12) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

double seasonal_eval(const SeasonalSpec& spec, double t_hours) {
  return std::exp(spec.intercept + harmonic_sum(spec.harmonics, t_hours));
}

double pv_seasonal_eval(const PvSeasonalSpec& spec, double t_hours) {
  const double s = std::sin(kTwoPi * spec.frequency * (t_hours + spec.phase_hours));
  return spec.amplitude_mw * std::max(s, 0.0);
}

double expected_pv(const PvSeasonalSpec& spec, const OuParams& ou, double t0,
                   double p0, double u) {
  if (!(ou.mean_reversion > 0.0)) {
    throw DegenerateParameters(
        "expected_pv: mean_reversion must be positive (got " +
        std::to_string(ou.mean_reversion) + ")");
  }
  if (u < t0) throw std::invalid_argument("expected_pv: u must be >= t0");
  const double dt = u - t0;
  const double decay = std::exp(-ou.mean_reversion * dt);
  const double var_term = ou.volatility * ou.volatility / (4.0 * ou.mean_reversion) *
                          (1.0 - decay * decay);
  return pv_seasonal_eval(spec, u) * std::exp(p0 * decay) * std::exp(var_term);
}

CurveExtrema seasonal_extrema(const SeasonalSpec& spec) {
  const auto g = [&spec](double t) { return harmonic_sum(spec.harmonics, t); };
  // Coarse scan over one day, then golden-section refinement around the
  // best cells.
  constexpr int kScan = 4096;
  double best_min = g(0.0), best_max = best_min;
  double t_min = 0.0, t_max = 0.0;
  for (int i = 1; i < kScan; ++i) {
    const double t = 24.0 * i / kScan;
    const double v = g(t);
    if (v < best_min) {
      best_min = v;
      t_min = t;
    }
    if (v > best_max) {
      best_max = v;
      t_max = t;
    }
  }
  const double cell = 24.0 / kScan;
  t_min = golden_min(g, t_min - cell, t_min + cell);
  t_max = golden_min([&g](double t) { return -g(t); }, t_max - cell, t_max + cell);
  CurveExtrema out;
  out.t_min = t_min;
  out.t_max = t_max;
  out.min_value = std::exp(spec.intercept + g(t_min));
  out.max_value = std::exp(spec.intercept + g(t_max));
  return out;
}

double intercept_for_min(const std::vector<Harmonic>& harmonics, double target_min) {
  if (!(target_min > 0.0)) {
    throw std::invalid_argument("intercept_for_min: target must be positive");
  }
  SeasonalSpec probe;
  probe.harmonics = harmonics;
  const CurveExtrema ex = seasonal_extrema(probe);
  return std::log(target_min) - std::log(ex.min_value);
}

double price_level(const ModelConfig& config, double t_hours, double x) {
  return seasonal_eval(config.price_seasonal, t_hours) * std::exp(x);
}

double demand_level(const ModelConfig& config, double t_hours, double d) {
  return seasonal_eval(config.demand_seasonal, t_hours) * std::exp(d);
}

double pv_level(const ModelConfig& config, double t_hours, double p) {
  return pv_seasonal_eval(config.pv_seasonal, t_hours) * std::exp(p);
}

void validate(const ModelConfig& config) {
  const auto fail = [](const std::string& what) {
    throw std::invalid_argument("ModelConfig: " + what);
  };
  const auto check_seasonal = [&](const SeasonalSpec& s, const char* name) {
    for (std::size_t i = 0; i < s.harmonics.size(); ++i) {
      if (!(s.harmonics[i].frequency > 0.0)) {
        fail(std::string(name) + ": harmonic frequencies must be positive");
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (s.harmonics[i].frequency == s.harmonics[j].frequency) {
          fail(std::string(name) + ": duplicate harmonic frequency");
        }
      }
    }
    if (!std::isfinite(s.intercept)) fail(std::string(name) + ": intercept not finite");
  };
  check_seasonal(config.price_seasonal, "price_seasonal");
  check_seasonal(config.demand_seasonal, "demand_seasonal");

  if (config.pv_seasonal.amplitude_mw < 0.0) fail("pv amplitude must be >= 0");
  if (!(config.pv_seasonal.frequency > 0.0)) fail("pv frequency must be > 0");

  for (const OuParams* ou : {&config.price_ou, &config.demand_ou, &config.pv_ou}) {
    if (ou->mean_reversion < 0.0) fail("mean reversion must be >= 0");
    if (ou->volatility < 0.0) fail("volatility must be >= 0");
  }
  for (int r = 0; r < 3; ++r) {
    for (int c = r + 1; c < 3; ++c) {
      if (config.noise_corr[r][c] != 0.0) fail("noise_corr must be lower triangular");
    }
  }

  const BatterySpec& b = config.battery;
  if (!(b.eta_c > 0.0 && b.eta_c <= 1.0)) fail("eta_c must be in (0, 1]");
  if (!(b.eta_d > 0.0 && b.eta_d <= 1.0)) fail("eta_d must be in (0, 1]");
  if (!(b.max_charge_mw > 0.0)) fail("max_charge_mw must be > 0");
  if (!(b.max_discharge_mw > 0.0)) fail("max_discharge_mw must be > 0");
  if (!(b.soc_min_mwh < b.soc_max_mwh)) fail("soc_min must be < soc_max");

  if (config.incentive_eur_mwh < 0.0) fail("incentive must be >= 0");
  if (config.discount_rate < 0.0) fail("discount rate must be >= 0");
  if (!(config.horizon_hours > 0.0)) fail("horizon must be > 0");
}

bool is_two_state(const ModelConfig& config) {
  const auto off = [&config](const OuParams& ou, int row) {
    double noise = 0.0;
    for (int c = 0; c < 3; ++c) noise += std::abs(config.noise_corr[row][c]);
    return ou.mean_reversion == 0.0 && (ou.volatility == 0.0 || noise == 0.0);
  };
  return off(config.price_ou, 0) && off(config.demand_ou, 1);
}

}  // namespace pvsc
