#pragma once

// Five-parameter Gaussian dynamics: forward (Schrodinger picture) and
// backward (Heisenberg picture) ODE systems, fixed-step RK4 integration and
// the closed-form comparators used to check them.

#include <utility>
#include <vector>

#include "qbm/core.hpp"

namespace qbm {

enum class Direction { forward, backward };

struct StateDerivative {
  double dsigma = 0.0;
  double dF = 0.0;
  double dr = 0.0;
  double dq = 0.0;
  double dp = 0.0;
};

StateDerivative forward_rhs(const GaussianState& state, const PotentialModel& pot,
                            const PhysicalParams& params);

StateDerivative backward_rhs(const GaussianState& state, const PotentialModel& pot,
                             const PhysicalParams& params);

struct TrajectorySample {
  double t = 0.0;
  GaussianState state;
  MomentSet moments;
  double area = 0.0;
  double purity = 1.0;
  double jacobian = 1.0;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  double dt = 0.0;
  Direction direction = Direction::forward;
  /// Max-norm difference of the final state against a run at dt/2.
  double error_estimate = 0.0;

  const TrajectorySample& back() const { return samples.back(); }
};

/// Relative slack on Sigma <= 4F accepted as roundoff.
inline constexpr double breakdown_slack = 1e-9;

/// Step size used when the caller does not choose one:
/// min(1e-3, 1/(1e4 gamma), period/1e3) with the period from V''(q0).
double default_dt(const GaussianState& initial, const PotentialModel& pot, const PhysicalParams& params);

/// Classical RK4 with fixed step. The step is adjusted to t_final / round(t_final / dt).
/// Every `sample_every` steps (and at the end) a sample is recorded. Throws
/// BreakdownError when Sigma <= 0, F <= 0 or Sigma > 4F(1 + breakdown_slack).
Trajectory integrate(const GaussianState& initial, const PotentialModel& pot,
                     const PhysicalParams& params, double t_final, double dt,
                     Direction direction, int sample_every = 1);

/// Max residual of the moment equations along a forward trajectory, using
/// centred differences of the sampled moments.
double moment_rhs_check(const Trajectory& trajectory, const PotentialModel& pot,
                        const PhysicalParams& params);

struct ValidityReport {
  double localization = 0.0;
  bool suspect = false;
};

/// localization = (Sigma + 4F) / (Sigma F); suspect when above threshold.
ValidityReport validity_monitor(const GaussianState& state, const PhysicalParams& params,
                                double threshold);

std::vector<std::pair<double, double>> area_trajectory(const Trajectory& trajectory);

/// Short-time area law A^2 = hbar^2/4 + (32/3)(gamma kT/hbar)^2 t^4.
double short_time_area(const PhysicalParams& params, double t);

/// Weak-coupling position variance dq2_u e^{-2 gamma t} + kT/(M w^2)(1 - e^{-2 gamma t}).
double weak_coupling_dq2(const PhysicalParams& params, double omega, double dq2_unitary, double t);

std::vector<double> weak_coupling_dq2(const PhysicalParams& params, double omega,
                                      const std::vector<std::pair<double, double>>& dq2_unitary);

/// Pure state of minimal A growth: Sigma0 = 4 M kT / hbar, F0 = Sigma0/4.
GaussianState short_time_reference_state(const PhysicalParams& params, double q = 0.0, double p = 0.0);

}  // namespace qbm
