#pragma once

#include "qbm/grid/grid.hpp"

namespace qbm {

/// Samples the Gaussian kernel on the grid without any fit checks.
GridOperator sample_gaussian(const GaussianState& state, const PhysicalParams& params, const GridSpec& spec);

/// Samples the Gaussian kernel after checking that it fits the grid:
///   |q| + 6 sqrt(dq2) < L_u,  6 sqrt(hbar/2F)(1 + |r|) < L_s,
///   5 (|p| + sqrt(dp2)) / hbar < pi / ds.
/// Violations raise ErrorKind::aliasing naming the bound.
GridOperator init_from_gaussian(const GaussianState& state, const PhysicalParams& params, const GridSpec& spec);

struct GridObservables {
  double trace = 0.0;
  double hs_norm = 0.0;
  double q = 0.0;
  double p = 0.0;
  double dq2 = 0.0;
  double dp2 = 0.0;
  double cpq = 0.0;
  double purity = 0.0;

  MomentSet moments() const { return {dq2, dp2, cpq, q, p}; }
};

/// Moments normalised by the trace; momentum moments from spectral
/// s-derivatives at s = 0. Requires the hermitian hint (misuse otherwise).
GridObservables observables(const GridOperator& k, const PhysicalParams& params);

double hs_distance_to_gaussian(const GridOperator& k, const GaussianState& state, const PhysicalParams& params);

/// Weyl symbol f(u_i, xi_m) on the conjugate grid xi_m = hbar k_m,
/// m = -N_s/2 .. N_s/2 - 1 stored in ascending order.
struct WeylSymbol {
  GridSpec spec;
  double hbar = 1.0;
  cvector values;

  double xi(int m) const noexcept { return hbar * pi * (m - spec.n_s / 2) / spec.l_s; }
  double dxi() const noexcept { return hbar * pi / spec.l_s; }
  cplx& operator()(int i, int m) noexcept { return values[static_cast<std::size_t>(i) * spec.n_s + m]; }
  cplx operator()(int i, int m) const noexcept { return values[static_cast<std::size_t>(i) * spec.n_s + m]; }
};

/// Empty symbol table on the conjugate grid of `spec`.
WeylSymbol make_symbol(const GridSpec& spec, double hbar);

WeylSymbol weyl_symbol(const GridOperator& k, const PhysicalParams& params);

/// Inverse of weyl_symbol; throws misuse when the symbol's grid or hbar
/// differ from the requested ones.
GridOperator weyl_quantize(const WeylSymbol& symbol, const PhysicalParams& params, const GridSpec& spec);

}  // namespace qbm
