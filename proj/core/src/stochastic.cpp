#include "pvsc/stochastic.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <string>

#include "pvsc/parallel.hpp"
#include "pvsc/rng.hpp"

namespace pvsc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Plug-in AR(1) standard errors are biased low in finite samples; reported
// standard errors carry this allowance.
constexpr double kSeFiniteSampleFactor = 1.3;

double conditional_sd(const OuParams& ou, double dt) {
  if (ou.volatility == 0.0) return 0.0;
  if (ou.mean_reversion == 0.0) return ou.volatility * std::sqrt(dt);
  // var = sigma^2 (1 - e^{-2 xi dt}) / (2 xi), written with expm1 for small
  // xi dt.
  const double var = ou.volatility * ou.volatility *
                     (-std::expm1(-2.0 * ou.mean_reversion * dt)) /
                     (2.0 * ou.mean_reversion);
  return std::sqrt(var);
}

}  // namespace

std::array<double, 3> ou_step_exact(const std::array<double, 3>& u,
                                    const std::array<OuParams, 3>& params,
                                    const std::array<std::array<double, 3>, 3>& corr,
                                    double dt_hours,
                                    const std::array<double, 3>& z) {
  std::array<double, 3> eps{};
  for (int i = 0; i < 3; ++i) {
    double acc = 0.0;
    for (int j = 0; j <= i; ++j) acc += corr[i][j] * z[j];
    eps[i] = acc;
  }
  std::array<double, 3> out{};
  for (int i = 0; i < 3; ++i) {
    const double decay = std::exp(-params[i].mean_reversion * dt_hours);
    out[i] = u[i] * decay + conditional_sd(params[i], dt_hours) * eps[i];
  }
  return out;
}

SamplePathSet simulate_paths(const ModelConfig& config, const TimeGrid& grid,
                             int n_paths, std::uint64_t seed,
                             std::optional<std::array<double, 3>> initial,
                             unsigned threads) {
  if (n_paths < 1) throw std::invalid_argument("simulate_paths: n_paths must be >= 1");
  if (!(grid.step_hours > 0.0) || grid.count < 2) {
    throw std::invalid_argument("simulate_paths: grid needs step > 0 and count >= 2");
  }

  const std::array<double, 3> u0 =
      initial.value_or(std::array<double, 3>{config.fixed_log_price,
                                             config.fixed_log_demand, 0.0});
  const std::array<OuParams, 3> params{config.price_ou, config.demand_ou,
                                       config.pv_ou};

  SamplePathSet set;
  set.grid = grid;
  set.n_paths = n_paths;
  set.seed = seed;
  set.data.resize(static_cast<std::size_t>(n_paths) * grid.count * 3);

  parallel_for(
      static_cast<std::size_t>(n_paths),
      [&](std::size_t path) {
        NormalSampler normal(derive_stream_seed(seed, path));
        std::array<double, 3> u = u0;
        double* row = set.data.data() + path * static_cast<std::size_t>(grid.count) * 3;
        row[0] = u[0];
        row[1] = u[1];
        row[2] = u[2];
        for (int step = 1; step < grid.count; ++step) {
          const std::array<double, 3> z{normal(), normal(), normal()};
          u = ou_step_exact(u, params, config.noise_corr, grid.step_hours, z);
          row[3 * step + 0] = u[0];
          row[3 * step + 1] = u[1];
          row[3 * step + 2] = u[2];
        }
      },
      threads);
  return set;
}

HarmonicFit fit_harmonic(const SeriesSample& sample,
                         const std::vector<double>& frequencies) {
  const std::size_t n = sample.values.size();
  if (n != sample.t_hours.size() || n < 2 * frequencies.size() + 2) {
    throw std::invalid_argument("fit_harmonic: series too short for the requested fit");
  }
  for (std::size_t i = 0; i < frequencies.size(); ++i) {
    if (!(frequencies[i] > 0.0)) throw InvalidFrequencies("fit_harmonic: frequency <= 0");
    for (std::size_t j = 0; j < i; ++j) {
      if (frequencies[i] == frequencies[j]) {
        throw InvalidFrequencies("fit_harmonic: duplicate frequency");
      }
    }
  }

  const std::size_t cols = 1 + 2 * frequencies.size();
  Eigen::MatrixXd design(n, cols);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(sample.values[i] > 0.0)) {
      throw std::invalid_argument("fit_harmonic: values must be positive (row " +
                                  std::to_string(i) + ")");
    }
    y(i) = std::log(sample.values[i]);
    design(i, 0) = 1.0;
    for (std::size_t f = 0; f < frequencies.size(); ++f) {
      const double w = kTwoPi * frequencies[f] * sample.t_hours[i];
      design(i, 1 + 2 * f) = std::sin(w);
      design(i, 2 + 2 * f) = std::cos(w);
    }
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < static_cast<Eigen::Index>(cols)) {
    throw InvalidFrequencies("fit_harmonic: singular design matrix (aliased frequencies)");
  }
  const Eigen::VectorXd beta = qr.solve(y);
  const Eigen::VectorXd resid = y - design * beta;

  HarmonicFit fit;
  fit.spec.intercept = beta(0);
  for (std::size_t f = 0; f < frequencies.size(); ++f) {
    fit.spec.harmonics.push_back(
        Harmonic{frequencies[f], beta(1 + 2 * f), beta(2 + 2 * f)});
  }
  fit.residuals.assign(resid.data(), resid.data() + n);

  // Standard errors under AR(1) residuals. With (near-)orthogonal harmonic
  // regressors, var(beta_j) ~= (2/n) S(w_j) and var(intercept) ~= S(0)/n,
  // where S is the residual spectral density sigma_eps^2 / |1 - a e^{iw}|^2
  // and w is in radians per sample.
  const double dt = n > 1 ? (sample.t_hours[n - 1] - sample.t_hours[0]) / (n - 1) : 1.0;
  double num = 0.0, den = 0.0, g0 = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    num += resid(i + 1) * resid(i);
    den += resid(i) * resid(i);
  }
  for (std::size_t i = 0; i < n; ++i) g0 += resid(i) * resid(i);
  g0 /= static_cast<double>(n);
  double a = den > 0.0 ? num / den : 0.0;
  a = std::clamp(a, 0.0, 0.999);  // a < 0 falls back to the iid formula
  const double sigma_eps2 = g0 * (1.0 - a * a);

  fit.std_errors.resize(cols);
  fit.std_errors[0] = kSeFiniteSampleFactor *
                      std::sqrt(sigma_eps2 / ((1.0 - a) * (1.0 - a) * n));
  for (std::size_t f = 0; f < frequencies.size(); ++f) {
    const double w = kTwoPi * frequencies[f] * dt;
    const double denom = 1.0 - 2.0 * a * std::cos(w) + a * a;
    const double se = std::sqrt(2.0 * sigma_eps2 / (denom * n));
    fit.std_errors[1 + 2 * f] = kSeFiniteSampleFactor * se;
    fit.std_errors[2 + 2 * f] = kSeFiniteSampleFactor * se;
  }
  return fit;
}

namespace {

OuFit fit_ou_from_sums(double num, double den, double sse, std::size_t n_pairs,
                       double dt) {
  if (n_pairs < 2) throw std::invalid_argument("fit_ou: need at least 3 residuals");
  if (!(den > 0.0)) throw NonMeanReverting("fit_ou: residuals have no variance");
  const double a = num / den;
  if (!(a > 0.0) || !(a < 1.0)) {
    throw NonMeanReverting("fit_ou: AR(1) coefficient " + std::to_string(a) +
                           " outside (0, 1)");
  }
  OuFit fit;
  fit.ar1 = a;
  fit.n_pairs = n_pairs;
  fit.params.mean_reversion = -std::log(a) / dt;
  // sse is accumulated against the fitted a, so this is the ML innovation
  // variance given a.
  const double innov_var = sse / static_cast<double>(n_pairs);
  fit.params.volatility =
      std::sqrt(innov_var * 2.0 * fit.params.mean_reversion / (1.0 - a * a));

  const double n = static_cast<double>(n_pairs);
  const double se_a = std::sqrt((1.0 - a * a) / n);
  fit.se_mean_reversion = kSeFiniteSampleFactor * se_a / (a * dt);
  // Delta method on ln sigma = (ln v + ln 2 xi - ln(1 - a^2)) / 2 with
  // var(ln v) ~= 2/n and a, v asymptotically independent.
  const double dlnsig_da = 0.5 * (1.0 / (a * std::log(a)) + 2.0 * a / (1.0 - a * a));
  const double var_lnsig = 0.5 / n + dlnsig_da * dlnsig_da * (1.0 - a * a) / n;
  fit.se_volatility =
      kSeFiniteSampleFactor * fit.params.volatility * std::sqrt(var_lnsig);
  return fit;
}

}  // namespace

OuFit fit_ou(std::span<const double> residuals, double dt_hours) {
  std::vector<std::vector<double>> one{{residuals.begin(), residuals.end()}};
  return fit_ou_segments(one, dt_hours);
}

OuFit fit_ou_segments(const std::vector<std::vector<double>>& segments,
                      double dt_hours) {
  if (!(dt_hours > 0.0)) throw std::invalid_argument("fit_ou: dt must be > 0");
  double mean = 0.0;
  std::size_t count = 0;
  for (const auto& seg : segments) {
    for (double v : seg) {
      mean += v;
      ++count;
    }
  }
  if (count < 3) throw std::invalid_argument("fit_ou: need at least 3 residuals");
  mean /= static_cast<double>(count);

  double num = 0.0, den = 0.0;
  std::size_t n_pairs = 0;
  for (const auto& seg : segments) {
    for (std::size_t i = 0; i + 1 < seg.size(); ++i) {
      const double u0 = seg[i] - mean;
      const double u1 = seg[i + 1] - mean;
      num += u1 * u0;
      den += u0 * u0;
      ++n_pairs;
    }
  }
  if (n_pairs < 2) throw std::invalid_argument("fit_ou: need at least 3 residuals");
  if (!(den > 0.0)) throw NonMeanReverting("fit_ou: residuals have no variance");
  const double a = num / den;
  double sse = 0.0;
  for (const auto& seg : segments) {
    for (std::size_t i = 0; i + 1 < seg.size(); ++i) {
      const double e = (seg[i + 1] - mean) - a * (seg[i] - mean);
      sse += e * e;
    }
  }
  return fit_ou_from_sums(num, den, sse, n_pairs, dt_hours);
}

PvFit fit_pv(const SeriesSample& sample, double frequency, double day_threshold_mw) {
  const std::size_t n = sample.values.size();
  if (n < 16 || n != sample.t_hours.size()) {
    throw std::invalid_argument("fit_pv: series too short");
  }
  const double dt = (sample.t_hours[n - 1] - sample.t_hours[0]) / (n - 1);

  // Fundamental harmonic of the raw series.
  double s_sin = 0.0, s_cos = 0.0, s_mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = kTwoPi * frequency * sample.t_hours[i];
    s_sin += sample.values[i] * std::sin(w);
    s_cos += sample.values[i] * std::cos(w);
    s_mean += sample.values[i];
  }
  // Over whole periods {1, sin, cos} are orthogonal with sum sin^2 = n/2.
  const double alpha = 2.0 * s_sin / n;
  const double beta = 2.0 * s_cos / n;
  const double amp_fund = std::hypot(alpha, beta);
  if (!(amp_fund > 0.0)) {
    throw std::invalid_argument("fit_pv: no daily component in the series");
  }
  double phase = std::atan2(beta, alpha) / (kTwoPi * frequency);
  const double period = 1.0 / frequency;
  phase = std::fmod(phase, period);
  if (phase < 0.0) phase += period;

  PvFit fit;
  fit.spec.frequency = frequency;
  fit.spec.phase_hours = phase;
  const double amp_raw = 2.0 * amp_fund;  // amplitude including E[e^U]

  // Noise spectral density near the daily frequency from the averaged
  // periodogram of the regression residuals (the multiplicative OU noise
  // turns into a narrow bump centered at the fitted line).
  const double mean = s_mean / n;
  std::vector<double> resid(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = kTwoPi * frequency * sample.t_hours[i];
    resid[i] = sample.values[i] - mean - alpha * std::sin(w) - beta * std::cos(w);
  }
  const long bin_f = std::lround(frequency * dt * n);
  double psd_sum = 0.0;
  int psd_count = 0;
  for (long j = bin_f - 4; j <= bin_f + 4; ++j) {
    if (j == bin_f || j < 1) continue;  // the fitted bin itself is regressed out
    const double w = kTwoPi * static_cast<double>(j) / static_cast<double>(n);
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      re += resid[i] * std::cos(w * i);
      im += resid[i] * std::sin(w * i);
    }
    psd_sum += (re * re + im * im) / n;
    ++psd_count;
  }
  const double psd = psd_count > 0 ? psd_sum / psd_count : 0.0;
  // The noise rides on the production profile whose fundamental is exactly
  // the fitted regressor, so its power loads the amplitude quadrature instead
  // of splitting evenly: var(amplitude direction) = 4 S / n, var(phase
  // direction) <= 2 S / n.
  const double se_amp_coef = kSeFiniteSampleFactor * std::sqrt(4.0 * psd / n);
  const double se_phase_coef = kSeFiniteSampleFactor * std::sqrt(2.0 * psd / n);
  const double se_amp_raw = 2.0 * se_amp_coef;
  fit.se_phase_hours = se_phase_coef / amp_fund / (kTwoPi * frequency);

  // Daytime residuals in log space, contiguous segments across night gaps.
  // Samples near dawn/dusk are trimmed as well: there the fitted profile is
  // nearly zero and log-residuals amplify the phase-estimation error by
  // 1/tan, which badly biases the AR(1) fit.
  PvSeasonalSpec profile{amp_raw, frequency, phase};
  const double level_floor = std::max(day_threshold_mw, 0.3 * amp_raw);
  std::vector<std::vector<double>> segments;
  std::vector<double> current;
  for (std::size_t i = 0; i < n; ++i) {
    const double level = pv_seasonal_eval(profile, sample.t_hours[i]);
    if (level > level_floor && sample.values[i] > 0.0) {
      current.push_back(std::log(sample.values[i] / level));
      ++fit.day_samples;
    } else if (!current.empty()) {
      segments.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) segments.push_back(std::move(current));
  fit.ou = fit_ou_segments(segments, dt);

  // amp_raw estimates A E[e^U]; divide out the stationary mean.
  const double e_u = std::exp(fit.ou.params.volatility * fit.ou.params.volatility /
                              (4.0 * fit.ou.params.mean_reversion));
  fit.spec.amplitude_mw = amp_raw / e_u;
  fit.se_amplitude = se_amp_raw / e_u;
  return fit;
}

}  // namespace pvsc
