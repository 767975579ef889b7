#include "qbm/gaussian_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace qbm {

namespace {

// The position-diffusion (Dekker) term eta d_u^2 has the same sign in both
// pictures; it only moves Sigma and F.
void add_eta_terms(StateDerivative& d, const GaussianState& s, const PhysicalParams& params) {
  const double eta = params.eta();
  if (eta == 0.0) return;
  const double hbar = params.hbar();
  d.dsigma += -2.0 * eta * s.sigma * s.sigma / hbar;
  d.dF += eta * s.r * s.r * s.sigma * s.sigma / (2.0 * hbar);
}

GaussianState axpy(const GaussianState& s, double h, const StateDerivative& d) {
  return {s.sigma + h * d.dsigma, s.F + h * d.dF, s.r + h * d.dr, s.q + h * d.dq, s.p + h * d.dp};
}

bool admissible(const GaussianState& s) {
  return s.sigma > 0.0 && s.F > 0.0 && s.sigma <= 4.0 * s.F * (1.0 + breakdown_slack) &&
         std::isfinite(s.r) && std::isfinite(s.q) && std::isfinite(s.p);
}

[[noreturn]] void breakdown(double t, const GaussianState& s) {
  std::ostringstream os;
  os.precision(17);
  os << "gaussian breakdown at t=" << t << ": Sigma=" << s.sigma << " F=" << s.F << " r=" << s.r;
  throw BreakdownError(t, os.str());
}

TrajectorySample make_sample(double t, const GaussianState& s, const PhysicalParams& params,
                             Direction dir) {
  TrajectorySample out;
  out.t = t;
  out.state = s;
  out.moments = moments_from_params(s, params);
  const auto pa = purity_and_area(s, params);
  out.area = pa.area;
  out.purity = pa.purity;
  out.jacobian = dir == Direction::backward ? std::exp(2.0 * params.gamma() * t) : 1.0;
  return out;
}

struct RunResult {
  std::vector<TrajectorySample> samples;
  GaussianState final_state;
};

RunResult run_rk4(const GaussianState& initial, const PotentialModel& pot, const PhysicalParams& params,
                  int steps, double h, Direction dir, int sample_every, bool record) {
  auto rhs = [&](const GaussianState& s) {
    return dir == Direction::forward ? forward_rhs(s, pot, params) : backward_rhs(s, pot, params);
  };
  RunResult out;
  GaussianState s = initial;
  if (record) out.samples.push_back(make_sample(0.0, s, params, dir));
  for (int n = 0; n < steps; ++n) {
    const auto k1 = rhs(s);
    const auto s2 = axpy(s, 0.5 * h, k1);
    if (!admissible(s2)) breakdown(n * h, s2);
    const auto k2 = rhs(s2);
    const auto s3 = axpy(s, 0.5 * h, k2);
    if (!admissible(s3)) breakdown(n * h, s3);
    const auto k3 = rhs(s3);
    const auto s4 = axpy(s, h, k3);
    if (!admissible(s4)) breakdown(n * h, s4);
    const auto k4 = rhs(s4);
    const double w = h / 6.0;
    s.sigma += w * (k1.dsigma + 2.0 * k2.dsigma + 2.0 * k3.dsigma + k4.dsigma);
    s.F += w * (k1.dF + 2.0 * k2.dF + 2.0 * k3.dF + k4.dF);
    s.r += w * (k1.dr + 2.0 * k2.dr + 2.0 * k3.dr + k4.dr);
    s.q += w * (k1.dq + 2.0 * k2.dq + 2.0 * k3.dq + k4.dq);
    s.p += w * (k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp);
    const double t = (n + 1) * h;
    if (!admissible(s)) breakdown(t, s);
    if (record && ((n + 1) % sample_every == 0 || n + 1 == steps)) {
      out.samples.push_back(make_sample(t, s, params, dir));
    }
  }
  out.final_state = s;
  return out;
}

}  // namespace

StateDerivative forward_rhs(const GaussianState& s, const PotentialModel& pot,
                            const PhysicalParams& params) {
  validate(s, breakdown_slack);
  const double m = params.mass();
  const double g = params.gamma();
  const double hbar = params.hbar();
  const auto v = pot.eval(s.q);
  StateDerivative d;
  d.dq = s.p / m;
  d.dp = -v.dv - 2.0 * g * s.p;
  d.dsigma = s.sigma * s.sigma * s.r / m;
  d.dF = s.sigma * s.F * s.r / m - 4.0 * g * s.F + 2.0 * params.diffusion() / hbar;
  d.dr = -s.sigma * s.r * s.r / (2.0 * m) - 2.0 * s.F / m - 2.0 * g * s.r + 2.0 * v.d2v / s.sigma;
  add_eta_terms(d, s, params);
  return d;
}

StateDerivative backward_rhs(const GaussianState& s, const PotentialModel& pot,
                             const PhysicalParams& params) {
  validate(s, breakdown_slack);
  const double m = params.mass();
  const double g = params.gamma();
  const double hbar = params.hbar();
  const auto v = pot.eval(s.q);
  StateDerivative d;
  d.dq = -s.p / m;
  d.dp = 2.0 * g * s.p + v.dv;
  d.dsigma = -s.sigma * s.sigma * s.r / m;
  d.dF = -s.sigma * s.F * s.r / m + 4.0 * g * s.F + 2.0 * params.diffusion() / hbar;
  d.dr = s.sigma * s.r * s.r / (2.0 * m) + 2.0 * s.F / m + 2.0 * g * s.r - 2.0 * v.d2v / s.sigma;
  add_eta_terms(d, s, params);
  return d;
}

double default_dt(const GaussianState& initial, const PotentialModel& pot, const PhysicalParams& params) {
  double dt = 1e-3;
  if (params.gamma() > 0.0) dt = std::min(dt, 1.0 / (params.gamma() * 1e4));
  const double curvature = pot.eval(initial.q).d2v;
  if (curvature > 0.0) {
    const double period = 2.0 * pi / std::sqrt(curvature / params.mass());
    dt = std::min(dt, period / 1e3);
  }
  return dt;
}

Trajectory integrate(const GaussianState& initial, const PotentialModel& pot,
                     const PhysicalParams& params, double t_final, double dt, Direction direction,
                     int sample_every) {
  if (!(dt > 0.0) || !(t_final > 0.0)) {
    throw Error(ErrorKind::constraint_violation, "integrate requires dt > 0 and t_final > 0");
  }
  validate(initial);
  const int steps = std::max(1, static_cast<int>(std::llround(t_final / dt)));
  const double h = t_final / steps;
  sample_every = std::max(1, sample_every);

  auto main = run_rk4(initial, pot, params, steps, h, direction, sample_every, true);
  const auto half = run_rk4(initial, pot, params, 2 * steps, 0.5 * h, direction, 1, false);

  Trajectory traj;
  traj.samples = std::move(main.samples);
  traj.dt = h;
  traj.direction = direction;
  const auto& a = main.final_state;
  const auto& b = half.final_state;
  traj.error_estimate = std::max({std::abs(a.sigma - b.sigma), std::abs(a.F - b.F), std::abs(a.r - b.r),
                                  std::abs(a.q - b.q), std::abs(a.p - b.p)});
  return traj;
}

double moment_rhs_check(const Trajectory& traj, const PotentialModel& pot, const PhysicalParams& params) {
  if (traj.direction != Direction::forward) {
    throw Error(ErrorKind::misuse, "moment_rhs_check needs a forward trajectory");
  }
  const auto& s = traj.samples;
  if (s.size() < 3) throw Error(ErrorKind::insufficient_data, "moment_rhs_check needs at least 3 samples");
  const double m = params.mass();
  const double g = params.gamma();
  const double d = params.diffusion();
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    const double h2 = s[i + 1].t - s[i - 1].t;
    const auto& mo = s[i].moments;
    const double v2 = pot.eval(mo.q).d2v;
    const double ddq2 = (s[i + 1].moments.dq2 - s[i - 1].moments.dq2) / h2;
    const double ddp2 = (s[i + 1].moments.dp2 - s[i - 1].moments.dp2) / h2;
    const double dcpq = (s[i + 1].moments.cpq - s[i - 1].moments.cpq) / h2;
    const double r1 = std::abs(ddq2 - (2.0 * mo.cpq / m + 2.0 * params.eta()));
    const double r2 = std::abs(ddp2 - (-4.0 * g * mo.dp2 - 2.0 * mo.cpq * v2 + 2.0 * d));
    const double r3 = std::abs(dcpq - (mo.dp2 / m - 2.0 * g * mo.cpq - mo.dq2 * v2));
    worst = std::max({worst, r1, r2, r3});
  }
  return worst;
}

ValidityReport validity_monitor(const GaussianState& s, const PhysicalParams&, double threshold) {
  validate(s, breakdown_slack);
  ValidityReport out;
  out.localization = (s.sigma + 4.0 * s.F) / (s.sigma * s.F);
  out.suspect = out.localization > threshold;
  return out;
}

std::vector<std::pair<double, double>> area_trajectory(const Trajectory& traj) {
  std::vector<std::pair<double, double>> out;
  out.reserve(traj.samples.size());
  for (const auto& s : traj.samples) out.emplace_back(s.t, s.area);
  return out;
}

double short_time_area(const PhysicalParams& params, double t) {
  const double hbar = params.hbar();
  const double c = params.gamma() * params.kT() / hbar;
  return std::sqrt(hbar * hbar / 4.0 + (32.0 / 3.0) * c * c * t * t * t * t);
}

double weak_coupling_dq2(const PhysicalParams& params, double omega, double dq2_unitary, double t) {
  const double decay = std::exp(-2.0 * params.gamma() * t);
  const double plateau = params.kT() / (params.mass() * omega * omega);
  return dq2_unitary * decay + plateau * (1.0 - decay);
}

std::vector<double> weak_coupling_dq2(const PhysicalParams& params, double omega,
                                      const std::vector<std::pair<double, double>>& dq2_unitary) {
  std::vector<double> out;
  out.reserve(dq2_unitary.size());
  for (const auto& [t, v] : dq2_unitary) out.push_back(weak_coupling_dq2(params, omega, v, t));
  return out;
}

GaussianState short_time_reference_state(const PhysicalParams& params, double q, double p) {
  if (!(params.kT() > 0.0)) {
    throw Error(ErrorKind::constraint_violation, "short-time reference state needs kT > 0");
  }
  const double sigma = 4.0 * params.mass() * params.kT() / params.hbar();
  return {sigma, sigma / 4.0, 0.0, q, p};
}

}  // namespace qbm
