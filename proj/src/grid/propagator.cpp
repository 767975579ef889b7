#include "qbm/grid/propagator.hpp"

#include <cmath>

#include "qbm/quadrature.hpp"

namespace qbm {

namespace {

// (e^{alpha tau} - 1) / alpha, continuous at alpha = 0.
double phi(double alpha, double tau) {
  if (alpha == 0.0) return tau;
  return std::expm1(alpha * tau) / alpha;
}

// Integrals over one step of the characteristic s(tau) = s0 e^{kappa tau} + w phi(kappa, tau):
// int e^{2 kappa tau}, int e^{kappa tau} phi(kappa, tau), int phi(kappa, tau)^2.
struct CharacteristicIntegrals {
  double ee = 0.0, ephi = 0.0, phiphi = 0.0;
};

CharacteristicIntegrals characteristic_integrals(double kappa, double h) {
  const auto rule = gauss_legendre(20, 0.0, h);
  CharacteristicIntegrals out;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    const double tau = rule.nodes[q];
    const double e = std::exp(kappa * tau);
    const double f = phi(kappa, tau);
    out.ee += rule.weights[q] * e * e;
    out.ephi += rule.weights[q] * e * f;
    out.phiphi += rule.weights[q] * f * f;
  }
  return out;
}

}  // namespace

Propagator::Propagator(const GridSpec& spec, const PotentialModel& pot, const PhysicalParams& params,
                       const PropagatorConfig& cfg)
    : spec_(spec),
      pot_(pot),
      params_(params),
      cfg_(cfg),
      col_fwd_(spec.n_u, spec.n_s, -1),
      col_bwd_(spec.n_u, spec.n_s, +1),
      resampler_(spec.n_s, std::exp((cfg.direction == Picture::schrodinger_L ? -2.0 : 2.0) *
                                    params.gamma() * cfg.dt)) {
  if (!(cfg.dt > 0.0)) throw Error(ErrorKind::constraint_violation, "propagator needs dt > 0");

  const double h = cfg.dt;
  phase_full_ = potential_phase(h);
  if (cfg.scheme == Scheme::strang) phase_half_ = potential_phase(0.5 * h);

  const double sigma = cfg.direction == Picture::schrodinger_L ? 1.0 : -1.0;
  const double kappa = 2.0 * sigma * params.gamma();
  const double c0 = cfg.direction == Picture::schrodinger_L ? 0.0 : 2.0 * params.gamma();
  const double eta = cfg.include_eta ? params.eta() : 0.0;
  const double hbar = params.hbar();
  const double diff = params.diffusion() / (hbar * hbar);
  const double a = resampler_.scale();
  const double phi_h = phi(kappa, h);
  const auto ci = characteristic_integrals(kappa, h);
  const double ds = spec.ds();
  const double norm = 1.0 / spec.n_u;

  beta_.resize(spec.n_u);
  weight_.resize(spec.size());
  for (int m = 0; m < spec.n_u; ++m) {
    const double k = spec.k_u(m);
    // The Nyquist row stands for both +k and -k; only zero drift keeps the
    // s -> -s mirror symmetry of Hermitian kernels.
    const double w = 2 * m == spec.n_u ? 0.0 : sigma * hbar * k / params.mass();
    const double b = -w * phi_h * a;
    beta_[m] = ((1.0 - a) * spec.l_s + b) / ds;
    double* row = weight_.data() + static_cast<std::size_t>(m) * spec.n_s;
    for (int j = 0; j < spec.n_s; ++j) {
      const double s0 = (spec.s(j) - w * phi_h) * a;
      const double quad = s0 * s0 * ci.ee + 2.0 * s0 * w * ci.ephi + w * w * ci.phiphi;
      row[j] = norm * std::exp(c0 * h - eta * k * k * h - diff * quad);
    }
  }
}

cvector Propagator::potential_phase(double tau) const {
  const double sign = cfg_.direction == Picture::schrodinger_L ? -1.0 : 1.0;
  const double c = sign * tau / params_.hbar();
  cvector out(spec_.size());
  for (int i = 0; i < spec_.n_u; ++i) {
    const double u = spec_.u(i);
    for (int j = 0; j < spec_.n_s; ++j) {
      const double half = 0.5 * spec_.s(j);
      const double dv = pot_.eval(u + half).v - pot_.eval(u - half).v;
      out[static_cast<std::size_t>(i) * spec_.n_s + j] = std::polar(1.0, c * dv);
    }
  }
  return out;
}

void Propagator::apply_potential(GridOperator& k, const cvector& phase) const {
  kernels::multiply(k.data(), phase.data(), k.size(), cfg_.exec);
}

void Propagator::apply_s_block(GridOperator& k) {
  col_fwd_.apply(k.data(), cfg_.exec);
  const double before = kernels::sum_norm(k.data(), spec_.n_u, spec_.n_s, cfg_.exec);
  const double lost =
      kernels::affine_resample_rows(k.data(), spec_.n_u, resampler_, beta_.data(), weight_.data(), cfg_.exec);
  if (before > 0.0) support_loss_ += lost / before;
  col_bwd_.apply(k.data(), cfg_.exec);
}

void Propagator::evolve(GridOperator& k, int steps) {
  if (!(k.spec() == spec_)) throw Error(ErrorKind::misuse, "operator grid does not match propagator grid");
  if (steps <= 0) return;
  if (cfg_.scheme == Scheme::strang) {
    apply_potential(k, phase_half_);
    for (int n = 0; n < steps; ++n) {
      apply_s_block(k);
      apply_potential(k, n + 1 < steps ? phase_full_ : phase_half_);
    }
  } else if (cfg_.direction == Picture::schrodinger_L) {
    for (int n = 0; n < steps; ++n) {
      apply_s_block(k);
      apply_potential(k, phase_full_);
    }
  } else {
    // Reverse order so that the Lie step of M is the exact adjoint of the Lie step of L.
    for (int n = 0; n < steps; ++n) {
      apply_potential(k, phase_full_);
      apply_s_block(k);
    }
  }
}

GridOperator step_L(const GridOperator& k, const PotentialModel& pot, const PhysicalParams& params,
                    const PropagatorConfig& cfg) {
  if (cfg.direction != Picture::schrodinger_L) {
    throw Error(ErrorKind::misuse, "step_L requires direction schrodinger_L");
  }
  Propagator prop(k.spec(), pot, params, cfg);
  GridOperator out = k;
  prop.step(out);
  return out;
}

GridOperator step_M(const GridOperator& k, const PotentialModel& pot, const PhysicalParams& params,
                    const PropagatorConfig& cfg, double* support_loss) {
  if (cfg.direction != Picture::heisenberg_M) {
    throw Error(ErrorKind::misuse, "step_M requires direction heisenberg_M");
  }
  Propagator prop(k.spec(), pot, params, cfg);
  GridOperator out = k;
  prop.step(out);
  if (support_loss) *support_loss = prop.support_loss();
  return out;
}

}  // namespace qbm
