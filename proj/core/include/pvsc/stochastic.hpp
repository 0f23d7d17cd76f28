#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "pvsc/model.hpp"

namespace pvsc {

struct TimeGrid {
  double start_hours = 0.0;
  double step_hours = 0.0;
  int count = 0;

  double time(int i) const { return start_hours + step_hours * i; }
  double end() const { return time(count - 1); }
};

// Simulated log-level trajectories; layout [path][step][component] with
// component order (x, d, p).
struct SamplePathSet {
  TimeGrid grid;
  int n_paths = 0;
  std::uint64_t seed = 0;
  std::vector<double> data;

  double at(int path, int step, int comp) const {
    return data[(static_cast<std::size_t>(path) * grid.count + step) * 3 + comp];
  }
};

// Uniformly spaced positive observations (prices EUR/MWh, demand MW, PV MW;
// PV may contain zeros).
struct SeriesSample {
  std::vector<double> t_hours;
  std::vector<double> values;
};

struct InvalidFrequencies : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NonMeanReverting : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One exact OU transition over dt: u_i e^{-xi_i dt} plus the exact conditional
// standard deviation times correlated noise. No discretization bias for any
// step size. Components with zero mean reversion and volatility pass through
// unchanged.
std::array<double, 3> ou_step_exact(const std::array<double, 3>& u,
                                    const std::array<OuParams, 3>& params,
                                    const std::array<std::array<double, 3>, 3>& corr,
                                    double dt_hours,
                                    const std::array<double, 3>& z);

// Simulates n_paths trajectories on the grid, exact transitions, one RNG
// stream per path derived from (seed, path index). Deterministic in
// (seed, config, grid) and independent of thread scheduling. The default
// initial state is (fixed_log_price, fixed_log_demand, 0).
SamplePathSet simulate_paths(const ModelConfig& config, const TimeGrid& grid,
                             int n_paths, std::uint64_t seed,
                             std::optional<std::array<double, 3>> initial = std::nullopt,
                             unsigned threads = 0);

// Ordinary least squares of log(values) on {1, sin(2 pi f t), cos(2 pi f t)}.
// Standard errors account for AR(1)-correlated residuals; see fit notes in
// the implementation.
struct HarmonicFit {
  SeasonalSpec spec;
  std::vector<double> std_errors;  // intercept, then (sin, cos) per harmonic
  std::vector<double> residuals;   // log(value) - fitted log curve
};
HarmonicFit fit_harmonic(const SeriesSample& sample,
                         const std::vector<double>& frequencies);

// AR(1) maximum likelihood on mean-zero residuals: a = sum u_{i+1} u_i /
// sum u_i^2, xi = -ln(a)/dt, sigma^2 = innovation variance * 2 xi / (1-a^2).
// Throws NonMeanReverting when a falls outside (0, 1).
struct OuFit {
  OuParams params;
  double ar1 = 0.0;
  double se_mean_reversion = 0.0;
  double se_volatility = 0.0;
  std::size_t n_pairs = 0;
};
OuFit fit_ou(std::span<const double> residuals, double dt_hours);

// Same estimator with transition pairs restricted to contiguous segments,
// e.g. daytime-only photovoltaic residuals separated by night gaps.
OuFit fit_ou_segments(const std::vector<std::vector<double>>& segments,
                      double dt_hours);

// Photovoltaic calibration. The half-wave-rectified profile has fundamental
// component (A/2) sin(2 pi f (t + phase)), so amplitude and phase come from
// an OLS fit of the raw series on {1, sin, cos} at the daily frequency. The
// OU parameters are fit on log-residuals over daytime samples only (fitted
// profile above day_threshold_mw), split into contiguous segments across the
// night gaps. The amplitude is corrected for the stationary mean of e^U.
struct PvFit {
  PvSeasonalSpec spec;
  OuFit ou;
  double se_amplitude = 0.0;
  double se_phase_hours = 0.0;
  std::size_t day_samples = 0;
};
PvFit fit_pv(const SeriesSample& sample, double frequency = 1.0 / 24.0,
             double day_threshold_mw = 1e-6);

}  // namespace pvsc
