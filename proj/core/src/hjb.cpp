#include "pvsc/hjb.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "pvsc/parallel.hpp"

namespace pvsc {

namespace {

int span_count(double span, double step, const char* what) {
  const double ratio = span / step;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, std::abs(ratio))) {
    throw std::invalid_argument(std::string("make_solver_grid: ") + what +
                                " span is not an integer multiple of the step");
  }
  return static_cast<int>(rounded) + 1;
}

// LU factorization of a band matrix with two sub- and two super-diagonals,
// no pivoting. The implicit operator is strictly diagonally dominant for any
// positive time step, so pivoting is not needed; a vanishing pivot means the
// stencil is broken.
class BandedLu {
 public:
  explicit BandedLu(int n) : n_(n), band_(static_cast<std::size_t>(n) * 5, 0.0) {}

  double& entry(int row, int col) { return band_[row * 5 + (col - row + 2)]; }
  double entry(int row, int col) const { return band_[row * 5 + (col - row + 2)]; }

  void factor() {
    for (int k = 0; k < n_; ++k) {
      const double pivot = entry(k, k);
      if (std::abs(pivot) < 1e-300) {
        throw BadStencil("hjb: singular implicit operator (zero pivot at row " +
                         std::to_string(k) + ")");
      }
      for (int i = k + 1; i <= std::min(k + 2, n_ - 1); ++i) {
        const double m = entry(i, k) / pivot;
        entry(i, k) = m;
        for (int j = k + 1; j <= std::min(k + 2, n_ - 1); ++j) {
          entry(i, j) -= m * entry(k, j);
        }
      }
    }
  }

  // In-place solve of LU x = b.
  void solve(double* b) const {
    for (int i = 1; i < n_; ++i) {
      double acc = b[i];
      for (int k = std::max(0, i - 2); k < i; ++k) acc -= entry(i, k) * b[k];
      b[i] = acc;
    }
    for (int i = n_ - 1; i >= 0; --i) {
      double acc = b[i];
      for (int k = i + 1; k <= std::min(i + 2, n_ - 1); ++k) {
        acc -= entry(i, k) * b[k];
      }
      b[i] = acc / entry(i, i);
    }
  }

 private:
  int n_;
  std::vector<double> band_;
};

// Implicit-in-p operator rows: U/tau + xi_p p dU/dp - (sigma^2/2) d2U/dp2,
// one-sided second differences on the first and last p rows.
BandedLu build_p_operator(const ModelConfig& config, const SolverGrid& grid,
                          bool paper_verbatim) {
  const int np = grid.n_p;
  const double xi = grid.p_step;
  const double inv_tau = 1.0 / grid.time_step;
  const double diff = 0.5 * config.pv_ou.volatility * config.pv_ou.volatility /
                      (xi * xi);
  BandedLu lu(np);
  for (int n = 0; n < np; ++n) {
    const double beta = config.pv_ou.mean_reversion * grid.p(n) / xi;
    lu.entry(n, n) += inv_tau;
    // Drift term +beta * dU/dp. Sign-aware upwinding keeps the off-diagonal
    // non-positive; the verbatim stencil is forward except on the last row.
    const bool forward = paper_verbatim ? (n < np - 1)
                                        : (grid.p(n) < 0.0 && n < np - 1) || n == 0;
    if (forward) {
      lu.entry(n, n + 1) += beta;
      lu.entry(n, n) -= beta;
    } else {
      lu.entry(n, n) += beta;
      lu.entry(n, n - 1) -= beta;
    }
    if (diff > 0.0) {
      if (n == 0) {
        lu.entry(n, n) -= diff;
        lu.entry(n, n + 1) += 2.0 * diff;
        lu.entry(n, n + 2) -= diff;
      } else if (n == np - 1) {
        lu.entry(n, n) -= diff;
        lu.entry(n, n - 1) += 2.0 * diff;
        lu.entry(n, n - 2) -= diff;
      } else {
        lu.entry(n, n - 1) -= diff;
        lu.entry(n, n) += 2.0 * diff;
        lu.entry(n, n + 1) -= diff;
      }
    }
  }
  lu.factor();
  return lu;
}

ControlBounds bounds_at(int k, int ns, const BatterySpec& battery) {
  ControlBounds box{1.0, battery.max_discharge_mw};
  if (k == 0) box.max_discharge_mw = 0.0;
  if (k == ns - 1) box.max_charge_fraction = 0.0;
  return box;
}

struct NodeBest {
  double value = std::numeric_limits<double>::infinity();
  ControlAction action;
  Regime regime = Regime::kIdle;
  double abs_drift = 0.0;
};

}  // namespace

SolverGrid make_solver_grid(const ModelConfig& config, double time_step,
                            double p_min, double p_max, double p_step,
                            double s_step) {
  if (!(time_step > 0.0) || !(p_step > 0.0) || !(s_step > 0.0)) {
    throw std::invalid_argument("make_solver_grid: steps must be positive");
  }
  if (!(p_min < p_max)) {
    throw std::invalid_argument("make_solver_grid: need p_min < p_max");
  }
  SolverGrid grid;
  grid.time_step = time_step;
  grid.p_min = p_min;
  grid.p_max = p_max;
  grid.p_step = p_step;
  grid.s_min = config.battery.soc_min_mwh;
  grid.s_step = s_step;
  grid.n_t = span_count(config.horizon_hours, time_step, "time");
  grid.n_p = span_count(p_max - p_min, p_step, "p");
  grid.n_s = span_count(config.battery.soc_max_mwh - config.battery.soc_min_mwh,
                        s_step, "s");
  if (grid.n_p < 5) {
    throw std::invalid_argument(
        "make_solver_grid: need at least 5 p nodes for the boundary stencils");
  }
  if (grid.n_s < 3) throw std::invalid_argument("make_solver_grid: need at least 3 s nodes");
  return grid;
}

Solution solve(const ModelConfig& config, const SolverGrid& grid,
               const SolveOptions& options) {
  validate(config);
  if (!is_two_state(config)) {
    throw std::invalid_argument(
        "hjb::solve: price and demand noise must be switched off "
        "(two-state reduction)");
  }
  if (std::abs(grid.s_min - config.battery.soc_min_mwh) > 1e-12 ||
      std::abs(grid.s(grid.n_s - 1) - config.battery.soc_max_mwh) > 1e-9 ||
      std::abs(grid.time(grid.n_t - 1) - config.horizon_hours) > 1e-9) {
    throw std::invalid_argument("hjb::solve: grid does not match the config spans");
  }

  const int nt = grid.n_t, np = grid.n_p, ns = grid.n_s;
  const BatterySpec& battery = config.battery;
  const double tau = grid.time_step;
  const double delta = grid.s_step;
  const double x = config.fixed_log_price;
  const double d = config.fixed_log_demand;
  const double z_incent = config.incentive_eur_mwh;

  Solution sol{ValueField{grid, {}}, PolicyField{grid, {}, {}}, 0.0};
  sol.value.values.assign(static_cast<std::size_t>(nt) * np * ns, 0.0);
  sol.policy.actions.assign(static_cast<std::size_t>(nt) * np * ns, ControlAction{});
  sol.policy.regimes.assign(static_cast<std::size_t>(nt) * np * ns, Regime::kIdle);

  std::vector<double> exp_p(np);
  for (int n = 0; n < np; ++n) exp_p[n] = std::exp(grid.p(n));

  BandedLu lu = build_p_operator(config, grid, options.paper_verbatim_stencil);

  std::atomic<std::uint64_t> cfl_bits{0};
  const auto bump_cfl = [&cfl_bits](double candidate) {
    std::uint64_t seen = cfl_bits.load(std::memory_order_relaxed);
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(candidate);
    while (candidate > std::bit_cast<double>(seen) &&
           !cfl_bits.compare_exchange_weak(seen, bits, std::memory_order_relaxed)) {
    }
  };

  // Minimize the explicit part at one node. up/down are the one-sided
  // s-differences of the known slice; at the band edges the control box
  // already removes the side that would leave the grid.
  const auto minimize_node = [&](double pv, double demand, double price,
                                 double disc, const ControlBounds& box, double up,
                                 double down) {
    NodeBest best;
    const auto consider = [&](const ControlAction& action, Regime regime) {
      const double drift = soc_drift(action, pv, battery);
      const double sold =
          (1.0 - action.charge_fraction) * pv + action.discharge_mw;
      double value = disc * (price * (demand - sold) -
                             z_incent * std::min(demand, sold));
      if (drift > 0.0) {
        value += drift * up;
      } else if (drift < 0.0) {
        value += drift * down;
      }
      if (value < best.value) {
        best.value = value;
        best.action = action;
        best.regime = regime;
        best.abs_drift = std::abs(drift);
      }
    };
    if (options.dense_controls >= 2) {
      const int gn = options.dense_controls;
      const double a_hi =
          box.max_charge_fraction > 0.0 && pv > 0.0
              ? std::min(1.0, battery.max_charge_mw / pv)
              : 0.0;
      const double c_hi = box.max_discharge_mw;
      const int a_steps = a_hi > 0.0 ? gn : 1;
      const int c_steps = c_hi > 0.0 ? gn : 1;
      for (int ia = 0; ia < a_steps; ++ia) {
        const double a = a_steps > 1 ? a_hi * ia / (a_steps - 1) : 0.0;
        for (int ic = 0; ic < c_steps; ++ic) {
          const double c = c_steps > 1 ? c_hi * ic / (c_steps - 1) : 0.0;
          Regime regime = Regime::kIdle;
          if (c > 0.0) {
            regime = c == c_hi ? Regime::kDischargeFull
                               : Regime::kMatchDemandByDischarge;
          } else if (a > 0.0) {
            regime = a == a_hi ? Regime::kChargeFull : Regime::kMatchDemandByCharge;
          }
          consider(ControlAction{a, c}, regime);
        }
      }
    } else {
      for (const Candidate& cand : candidate_actions(pv, demand, battery, box)) {
        consider(cand.action, cand.regime);
      }
    }
    bump_cfl(best.abs_drift * tau / delta);
    return best;
  };

  // Terminal slice: value 0; record the myopic minimizer of the running term.
  {
    const double t = grid.time(nt - 1);
    const double fp = pv_seasonal_eval(config.pv_seasonal, t);
    const double price = price_level(config, t, x);
    const double demand = demand_level(config, t, d);
    const double disc = std::exp(-config.discount_rate * t);
    for (int k = 0; k < ns; ++k) {
      const ControlBounds box = bounds_at(k, ns, battery);
      for (int n = 0; n < np; ++n) {
        const NodeBest best =
            minimize_node(fp * exp_p[n], demand, price, disc, box, 0.0, 0.0);
        const std::size_t idx = sol.policy.index(nt - 1, n, k);
        sol.policy.actions[idx] = best.action;
        sol.policy.regimes[idx] = best.regime;
      }
    }
  }

  std::vector<double> rhs(static_cast<std::size_t>(ns) * np);
  for (int i = nt - 1; i >= 1; --i) {
    const double t = grid.time(i);
    const double fp = pv_seasonal_eval(config.pv_seasonal, t);
    const double price = price_level(config, t, x);
    const double demand = demand_level(config, t, d);
    const double disc = std::exp(-config.discount_rate * t);

    parallel_for(
        static_cast<std::size_t>(ns),
        [&](std::size_t k) {
          const ControlBounds box = bounds_at(static_cast<int>(k), ns, battery);
          double* rhs_row = rhs.data() + k * np;
          for (int n = 0; n < np; ++n) {
            const double here = sol.value.at(i, n, static_cast<int>(k));
            const double up =
                k + 1 < static_cast<std::size_t>(ns)
                    ? (sol.value.at(i, n, static_cast<int>(k) + 1) - here) / delta
                    : 0.0;
            const double down =
                k > 0 ? (here - sol.value.at(i, n, static_cast<int>(k) - 1)) / delta
                      : 0.0;
            const NodeBest best =
                minimize_node(fp * exp_p[n], demand, price, disc, box, up, down);
            rhs_row[n] = here / tau + best.value;
            const std::size_t idx = sol.policy.index(i - 1, n, static_cast<int>(k));
            sol.policy.actions[idx] = best.action;
            sol.policy.regimes[idx] = best.regime;
          }
          lu.solve(rhs_row);
          for (int n = 0; n < np; ++n) {
            sol.value.at(i - 1, n, static_cast<int>(k)) = rhs_row[n];
          }
        },
        options.threads);

    for (int k = 0; k < ns; ++k) {
      for (int n = 0; n < np; ++n) {
        if (!std::isfinite(sol.value.at(i - 1, n, k))) {
          throw UnstableGrid("hjb: non-finite value at t=" +
                             std::to_string(grid.time(i - 1)));
        }
      }
    }
  }

  sol.cfl_max = std::bit_cast<double>(cfl_bits.load());
  return sol;
}

double value_slope_s(const ValueField& field, int i, int n, int k, SlopeMode mode) {
  const int ns = field.grid.n_s;
  const double delta = field.grid.s_step;
  const bool has_up = k + 1 < ns;
  const bool has_down = k > 0;
  const double up = has_up ? (field.at(i, n, k + 1) - field.at(i, n, k)) / delta : 0.0;
  const double down = has_down ? (field.at(i, n, k) - field.at(i, n, k - 1)) / delta : 0.0;
  switch (mode) {
    case SlopeMode::kForward:
      return has_up ? up : down;
    case SlopeMode::kBackward:
      return has_down ? down : up;
    case SlopeMode::kCentral:
      if (has_up && has_down) return 0.5 * (up + down);
      return has_up ? up : down;
  }
  return 0.0;
}

ShapeReport check_shape(const ValueField& field, double tolerance_eur) {
  const SolverGrid& grid = field.grid;
  ShapeReport report;
  report.slices.resize(grid.n_t);
  for (int i = 0; i < grid.n_t; ++i) {
    ShapeReport::Slice& slice = report.slices[i];
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int k = 0; k < grid.n_s; ++k) {
      for (int n = 0; n < grid.n_p; ++n) {
        const double v = field.at(i, n, k);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        if (k + 1 < grid.n_s) {
          const double diff = field.at(i, n, k + 1) - v;
          slice.s_monotonicity = std::max(slice.s_monotonicity, diff);
          if (diff > tolerance_eur) ++report.nodes_beyond_tolerance;
        }
        if (k > 0 && k + 1 < grid.n_s) {
          const double second =
              field.at(i, n, k + 1) - 2.0 * v + field.at(i, n, k - 1);
          slice.s_convexity = std::max(slice.s_convexity, -second);
          if (-second > tolerance_eur) ++report.nodes_beyond_tolerance;
        }
        if (n + 1 < grid.n_p) {
          const double diff = field.at(i, n + 1, k) - v;
          slice.p_monotonicity = std::max(slice.p_monotonicity, diff);
          if (diff > tolerance_eur) ++report.nodes_beyond_tolerance;
        }
      }
    }
    slice.value_range = hi - lo;
    report.max_s_monotonicity = std::max(report.max_s_monotonicity, slice.s_monotonicity);
    report.max_s_convexity = std::max(report.max_s_convexity, slice.s_convexity);
    report.max_p_monotonicity = std::max(report.max_p_monotonicity, slice.p_monotonicity);
    if (slice.value_range > 0.0) {
      const double worst =
          std::max({slice.s_monotonicity, slice.s_convexity, slice.p_monotonicity}) /
          slice.value_range;
      report.worst_relative = std::max(report.worst_relative, worst);
    }
  }
  return report;
}

double value_at(const ValueField& field, double t_hours, double p, double s_mwh) {
  const SolverGrid& grid = field.grid;
  const double t_hi = grid.time(grid.n_t - 1);
  const double p_hi = grid.p(grid.n_p - 1);
  const double s_hi = grid.s(grid.n_s - 1);
  const double eps_t = 1e-9 * std::max(1.0, std::abs(t_hi));
  if (t_hours < -eps_t || t_hours > t_hi + eps_t || p < grid.p_min - 1e-12 ||
      p > p_hi + 1e-12 || s_mwh < grid.s_min - 1e-12 || s_mwh > s_hi + 1e-12) {
    throw ExtrapolationRefused("value_at: query outside the grid hull");
  }
  const auto locate = [](double v, double lo, double step, int count) {
    double offset = (v - lo) / step;
    int cell = static_cast<int>(std::floor(offset));
    cell = std::clamp(cell, 0, count - 2);
    const double frac = std::clamp(offset - cell, 0.0, 1.0);
    return std::pair<int, double>(cell, frac);
  };
  const auto [it, ft] = locate(t_hours, 0.0, grid.time_step, grid.n_t);
  const auto [in, fn] = locate(p, grid.p_min, grid.p_step, grid.n_p);
  const auto [ik, fk] = locate(s_mwh, grid.s_min, grid.s_step, grid.n_s);

  double out = 0.0;
  for (int dt = 0; dt <= 1; ++dt) {
    const double wt = dt ? ft : 1.0 - ft;
    if (wt == 0.0) continue;
    for (int dn = 0; dn <= 1; ++dn) {
      const double wn = dn ? fn : 1.0 - fn;
      if (wn == 0.0) continue;
      for (int dk = 0; dk <= 1; ++dk) {
        const double wk = dk ? fk : 1.0 - fk;
        if (wk == 0.0) continue;
        out += wt * wn * wk * field.at(it + dt, in + dn, ik + dk);
      }
    }
  }
  return out;
}

PolicyFunction lattice_policy(const PolicyField& field, const ModelConfig& config) {
  const SolverGrid grid = field.grid;
  const PolicyField* ptr = &field;
  const BatterySpec battery = config.battery;
  // Seasonal levels cached per slice; the regime lookup rounds to the slice
  // anyway, so the node-time levels are the consistent choice.
  auto f_pv = std::make_shared<std::vector<double>>(grid.n_t);
  auto demand = std::make_shared<std::vector<double>>(grid.n_t);
  for (int i = 0; i < grid.n_t; ++i) {
    (*f_pv)[i] = pv_seasonal_eval(config.pv_seasonal, grid.time(i));
    (*demand)[i] = demand_level(config, grid.time(i), config.fixed_log_demand);
  }
  return [grid, ptr, battery, f_pv, demand](double t_hours, double log_pv,
                                            double soc_mwh) {
    const auto nearest = [](double v, double lo, double step, int count) {
      const int idx = static_cast<int>(std::lround((v - lo) / step));
      return std::clamp(idx, 0, count - 1);
    };
    const int i = nearest(t_hours, 0.0, grid.time_step, grid.n_t);
    const int n = nearest(log_pv, grid.p_min, grid.p_step, grid.n_p);
    const int k = nearest(soc_mwh, grid.s_min, grid.s_step, grid.n_s);
    const double pv = (*f_pv)[i] * std::exp(log_pv);
    const double a_cap = pv > 0.0 ? std::min(1.0, battery.max_charge_mw / pv) : 0.0;
    switch (ptr->regime(i, n, k)) {
      case Regime::kIdle:
        return ControlAction{};
      case Regime::kDischargeFull:
        return ControlAction{0.0, battery.max_discharge_mw};
      case Regime::kChargeFull:
        return ControlAction{a_cap, 0.0};
      case Regime::kMatchDemandByCharge: {
        if (pv <= 0.0) return ControlAction{};
        const double a = std::clamp(1.0 - (*demand)[i] / pv, 0.0, a_cap);
        return ControlAction{a, 0.0};
      }
      case Regime::kMatchDemandByDischarge: {
        const double c =
            std::clamp((*demand)[i] - pv, 0.0, battery.max_discharge_mw);
        return ControlAction{0.0, c};
      }
    }
    return ControlAction{};
  };
}

}  // namespace pvsc
