#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "pvsc/cost.hpp"
#include "pvsc/model.hpp"
#include "pvsc/policy.hpp"

namespace pvsc {

// Lattice for the backward solve on (t, p, s). Node counts are derived from
// the spans, which must be integer multiples of the steps.
struct SolverGrid {
  double time_step = 0.0;  // tau, hours
  double p_min = 0.0;
  double p_max = 0.0;
  double p_step = 0.0;  // xi
  double s_min = 0.0;
  double s_step = 0.0;  // delta, MWh
  int n_t = 0;
  int n_p = 0;
  int n_s = 0;

  double time(int i) const { return time_step * i; }
  double p(int n) const { return p_min + p_step * n; }
  double s(int k) const { return s_min + s_step * k; }
};

SolverGrid make_solver_grid(const ModelConfig& config, double time_step,
                            double p_min, double p_max, double p_step,
                            double s_step);

struct ValueField {
  SolverGrid grid;
  std::vector<double> values;  // [t][s][p], p fastest

  double at(int i, int n, int k) const {
    return values[(static_cast<std::size_t>(i) * grid.n_s + k) * grid.n_p + n];
  }
  double& at(int i, int n, int k) {
    return values[(static_cast<std::size_t>(i) * grid.n_s + k) * grid.n_p + n];
  }
};

struct PolicyField {
  SolverGrid grid;
  std::vector<ControlAction> actions;  // same layout as ValueField
  std::vector<Regime> regimes;

  std::size_t index(int i, int n, int k) const {
    return (static_cast<std::size_t>(i) * grid.n_s + k) * grid.n_p + n;
  }
  const ControlAction& action(int i, int n, int k) const {
    return actions[index(i, n, k)];
  }
  Regime regime(int i, int n, int k) const { return regimes[index(i, n, k)]; }
};

struct UnstableGrid : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BadStencil : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ExtrapolationRefused : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolveOptions {
  // Reproduce the forward-difference drift stencil everywhere instead of
  // sign-aware upwinding (which keeps the implicit operator an M-matrix on a
  // domain straddling p = 0).
  bool paper_verbatim_stencil = false;
  // 0 = analytic five-candidate control set; N >= 2 = dense N x N lattice
  // for verification runs.
  int dense_controls = 0;
  unsigned threads = 0;
};

struct Solution {
  ValueField value;
  PolicyField policy;
  // max |f_s| tau / delta seen over all evaluated controls; the explicit
  // s-part of the scheme is monotone only when this stays <= 1.
  double cfl_max = 0.0;
};

// Backward induction for the two-state problem: explicit upwind minimization
// in s, implicit banded solve in p, terminal value 0. Also records the argmin
// action at every node.
Solution solve(const ModelConfig& config, const SolverGrid& grid,
               const SolveOptions& options = {});

enum class SlopeMode { kCentral, kForward, kBackward };

// dV/ds at a node by finite differences; forward/backward match the scheme's
// own charge/discharge stencils, central is for reporting. One-sided at the
// band edges.
double value_slope_s(const ValueField& field, int i, int n, int k,
                     SlopeMode mode = SlopeMode::kCentral);

// Monotonicity/convexity diagnostics per time slice (undivided differences,
// EUR): V non-increasing in s, discretely convex in s, non-increasing in p.
struct ShapeReport {
  struct Slice {
    double s_monotonicity = 0.0;  // max positive V(k+1) - V(k)
    double s_convexity = 0.0;     // max negative second difference, as >= 0
    double p_monotonicity = 0.0;  // max positive V(n+1) - V(n)
    double value_range = 0.0;     // max - min over the slice
  };
  std::vector<Slice> slices;
  double max_s_monotonicity = 0.0;
  double max_s_convexity = 0.0;
  double max_p_monotonicity = 0.0;
  // worst violation / slice range over slices with a nonzero range
  double worst_relative = 0.0;
  std::size_t nodes_beyond_tolerance = 0;
};
ShapeReport check_shape(const ValueField& field, double tolerance_eur);

// Trilinear interpolation inside the grid hull; exact at nodes. Throws
// ExtrapolationRefused outside.
double value_at(const ValueField& field, double t_hours, double p, double s_mwh);

// Feedback policy backed by the solved field: the regime label is looked up
// at the nearest node and the action is rebuilt for the actual state, so
// demand-matching magnitudes and charge caps track the continuous production
// level instead of replaying the node's stale values. The field must outlive
// the returned function.
PolicyFunction lattice_policy(const PolicyField& field, const ModelConfig& config);

}  // namespace pvsc
