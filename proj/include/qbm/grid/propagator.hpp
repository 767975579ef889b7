#pragma once

// Split-step propagation of operator kernels under the master equation
// (Schrodinger picture, L) and its adjoint (Heisenberg picture, M).
//
// The generator is split as S + U. U is the potential phase, diagonal in
// (u, s). S collects the kinetic, friction, diffusion and optional Dekker
// terms; after an FFT along u it is a first-order transport in s for every
// k_u and is solved exactly along its characteristics:
//   ds/dtau = w + kappa s,  w = +-hbar k_u/M,  kappa = +-2 gamma
// (upper sign for L). The required affine remap of each row is evaluated
// spectrally by kernels::AffineResampler.

#include "qbm/grid/grid.hpp"
#include "qbm/grid/kernels.hpp"

namespace qbm {

enum class Scheme { lie, strang };
enum class Picture { schrodinger_L, heisenberg_M };

struct PropagatorConfig {
  double dt = 0.01;
  Scheme scheme = Scheme::strang;
  Picture direction = Picture::schrodinger_L;
  bool include_eta = false;
  Exec exec = Exec::parallel;
};

class Propagator {
 public:
  Propagator(const GridSpec& spec, const PotentialModel& pot, const PhysicalParams& params,
             const PropagatorConfig& cfg);

  /// Advances by `steps` steps of size dt. Consecutive Strang half-steps
  /// of the potential phase are fused.
  void evolve(GridOperator& k, int steps);
  void step(GridOperator& k) { evolve(k, 1); }

  /// Fraction of the HS norm squared discarded so far by the s-remap
  /// (support or bandwidth leaving the grid), summed over steps.
  double support_loss() const noexcept { return support_loss_; }
  void reset_support_loss() noexcept { support_loss_ = 0.0; }

  const PropagatorConfig& config() const noexcept { return cfg_; }
  const GridSpec& spec() const noexcept { return spec_; }

 private:
  void apply_potential(GridOperator& k, const cvector& phase) const;
  void apply_s_block(GridOperator& k);
  cvector potential_phase(double tau) const;

  GridSpec spec_;
  PotentialModel pot_;
  PhysicalParams params_;
  PropagatorConfig cfg_;

  cvector phase_full_;
  cvector phase_half_;
  kernels::ColumnFft col_fwd_;
  kernels::ColumnFft col_bwd_;
  kernels::AffineResampler resampler_;
  std::vector<double> beta_;
  rvector weight_;
  double support_loss_ = 0.0;
};

/// One Schrodinger-picture step; cfg.direction must be schrodinger_L.
GridOperator step_L(const GridOperator& k, const PotentialModel& pot, const PhysicalParams& params,
                    const PropagatorConfig& cfg);

/// One Heisenberg-picture step; cfg.direction must be heisenberg_M.
/// The discarded norm fraction is written to `support_loss` when given.
GridOperator step_M(const GridOperator& k, const PotentialModel& pot, const PhysicalParams& params,
                    const PropagatorConfig& cfg, double* support_loss = nullptr);

}  // namespace qbm
