#include "qbm/grid/observables.hpp"

#include <cmath>
#include <sstream>

#include "qbm/grid/fft.hpp"

namespace qbm {

namespace {

// Weights w_j with sum_j w_j K(s_j) = d^n K / ds^n at s = 0 for the
// trigonometric interpolant (n = 1 or 2).
std::vector<double> derivative_weights(const GridSpec& g, int order) {
  const int n = g.n_s;
  const int half = n / 2;
  std::vector<double> w(n, 0.0);
  for (int j = 0; j < n; ++j) {
    double acc = 0.0;
    for (int m = -half; m < half; ++m) {
      const double k = pi * m / g.l_s;
      const double theta = -2.0 * pi * static_cast<double>(m) * (j - half) / n;
      if (order == 1) {
        if (m == -half) continue;
        acc += -k * std::sin(theta);  // Re(i k e^{i theta})
      } else {
        acc += -k * k * std::cos(theta);
      }
    }
    w[j] = acc / n;
  }
  return w;
}

}  // namespace

GridOperator sample_gaussian(const GaussianState& state, const PhysicalParams& params, const GridSpec& spec) {
  validate(state);
  GridOperator k(spec, true);
  for (int i = 0; i < spec.n_u; ++i) {
    const double u = spec.u(i);
    for (int j = 0; j < spec.n_s; ++j) k(i, j) = eval_density(state, params, u, spec.s(j));
  }
  return k;
}

GridOperator init_from_gaussian(const GaussianState& state, const PhysicalParams& params, const GridSpec& spec) {
  const auto m = moments_from_params(state, params);
  const double hbar = params.hbar();
  std::ostringstream os;
  os.precision(6);
  const double u_need = std::abs(state.q) + 6.0 * std::sqrt(m.dq2);
  if (!(u_need < spec.l_u)) {
    os << "state does not fit the grid: |q| + 6 sqrt(dq2) = " << u_need << " >= L_u = " << spec.l_u;
    throw Error(ErrorKind::aliasing, os.str());
  }
  const double s_need = 6.0 * std::sqrt(hbar / (2.0 * state.F)) * (1.0 + std::abs(state.r));
  if (!(s_need < spec.l_s)) {
    os << "state does not fit the grid: off-diagonal width 6 sqrt(hbar/2F)(1+|r|) = " << s_need
       << " >= L_s = " << spec.l_s;
    throw Error(ErrorKind::aliasing, os.str());
  }
  const double k_need = 5.0 * (std::abs(state.p) + std::sqrt(m.dp2)) / hbar;
  if (!(k_need < spec.k_s_max())) {
    os << "state does not fit the grid: 5 (|p| + sqrt(dp2))/hbar = " << k_need
       << " >= Nyquist pi/ds = " << spec.k_s_max();
    throw Error(ErrorKind::aliasing, os.str());
  }
  return sample_gaussian(state, params, spec);
}

GridObservables observables(const GridOperator& k, const PhysicalParams& params) {
  if (!k.hermitian_hint()) {
    throw Error(ErrorKind::misuse, "moment extraction needs a Hermitian operator");
  }
  const auto& g = k.spec();
  const double hbar = params.hbar();
  const auto w1 = derivative_weights(g, 1);
  const auto w2 = derivative_weights(g, 2);
  const int j0 = g.s_zero();

  double tr = 0.0, x1 = 0.0, x2 = 0.0, p1 = 0.0, p2 = 0.0, xp = 0.0;
  for (int i = 0; i < g.n_u; ++i) {
    const double u = g.u(i);
    const cplx* row = k.row(i);
    cplx d1 = 0.0, d2 = 0.0;
    for (int j = 0; j < g.n_s; ++j) {
      d1 += w1[j] * row[j];
      d2 += w2[j] * row[j];
    }
    const double diag = row[j0].real();
    tr += diag;
    x1 += u * diag;
    x2 += u * u * diag;
    // -i hbar d1 and -hbar^2 d2 are real for Hermitian kernels.
    p1 += hbar * d1.imag();
    p2 += -hbar * hbar * d2.real();
    xp += hbar * u * d1.imag();
  }
  GridObservables out;
  const double du = g.du();
  out.trace = tr * du;
  out.hs_norm = hs_norm(k);
  out.purity = out.hs_norm * out.hs_norm;
  const double norm = du / out.trace;
  out.q = x1 * norm;
  out.p = p1 * norm;
  out.dq2 = x2 * norm - out.q * out.q;
  out.dp2 = p2 * norm - out.p * out.p;
  out.cpq = xp * norm - out.q * out.p;
  return out;
}

double hs_distance_to_gaussian(const GridOperator& k, const GaussianState& state, const PhysicalParams& params) {
  return hs_distance(k, sample_gaussian(state, params, k.spec()));
}

WeylSymbol make_symbol(const GridSpec& spec, double hbar) {
  return {spec, hbar, cvector(spec.size(), cplx(0.0, 0.0))};
}

WeylSymbol weyl_symbol(const GridOperator& k, const PhysicalParams& params) {
  const auto& g = k.spec();
  auto sym = make_symbol(g, params.hbar());
  const int n = g.n_s;
  const int half = n / 2;
  FftPlan fwd(n, -1);
  cvector buf(n);
  const double ds = g.ds();
  for (int i = 0; i < g.n_u; ++i) {
    std::copy(k.row(i), k.row(i) + n, buf.begin());
    fwd.execute(buf.data());
    for (int mp = 0; mp < n; ++mp) {
      const int m = mp - half;
      const double sign = (m % 2 == 0) ? 1.0 : -1.0;
      sym(i, mp) = ds * sign * buf[(m + n) % n];
    }
  }
  return sym;
}

GridOperator weyl_quantize(const WeylSymbol& symbol, const PhysicalParams& params, const GridSpec& spec) {
  if (!(symbol.spec == spec) || symbol.values.size() != spec.size() ||
      std::abs(symbol.hbar - params.hbar()) > 1e-14 * params.hbar()) {
    throw Error(ErrorKind::misuse, "symbol table does not match the requested grid / hbar");
  }
  GridOperator k(spec, false);
  const int n = spec.n_s;
  const int half = n / 2;
  FftPlan bwd(n, +1);
  cvector buf(n);
  const double scale = 1.0 / (n * spec.ds());
  bool real = true;
  for (int i = 0; i < spec.n_u; ++i) {
    for (int mp = 0; mp < n; ++mp) {
      const int m = mp - half;
      const double sign = (m % 2 == 0) ? 1.0 : -1.0;
      const cplx f = symbol(i, mp);
      if (f.imag() != 0.0) real = false;
      buf[(m + n) % n] = sign * scale * f;
    }
    bwd.execute(buf.data());
    std::copy(buf.begin(), buf.end(), k.row(i));
  }
  k.set_hermitian_hint(real);
  return k;
}

}  // namespace qbm
