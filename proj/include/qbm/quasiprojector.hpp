#pragma once

// Gaussian-smeared quasiprojectors
//   P = int_Gamma dq dp / (2 pi hbar) rho(Sigma, F, r, q, p)
// realised on a grid through their Weyl symbol, plus the measurements used
// to judge how close they are to true projectors and how they move under
// the dissipative dynamics.

#include <optional>
#include <string>
#include <vector>

#include "qbm/cell.hpp"
#include "qbm/core.hpp"
#include "qbm/grid/grid.hpp"
#include "qbm/grid/observables.hpp"
#include "qbm/grid/propagator.hpp"

namespace qbm {

struct Smearing {
  double sigma = 2.0;
  double F = 0.5;
  double r = 0.0;

  /// Wigner area of the smearing state, (hbar/2) sqrt(4F/Sigma).
  double area(double hbar) const;
};

/// Pure smearing whose position and momentum widths are in the same ratio
/// as the cell sides: Sigma = 2P/L, F = Sigma/4.
Smearing max_resolution_smearing(const PhaseSpaceCell& cell);

struct MarginReport {
  double l = 0.0;
  double margin_area = 0.0;
  double epsilon = 0.0;
  /// Perimeter-strip estimate of the margin, 2 l x perimeter (metric units
  /// mapped back to phase-space area).
  double strip_estimate = 0.0;
  bool curvature_ok = true;
  bool regular = false;
};

/// Metric d(dq, dp) = Sigma dq^2/(4 hbar) + dp^2 / (4 hbar F (1 + Sigma r^2/4F)).
double metric_distance2(const Smearing& s, double hbar, double dq, double dp);

/// Margin length l = sqrt(ln(1/eps)/2), the smallest l with e^{-2 l^2} <= eps.
double default_margin_length(double epsilon_target);

/// Area of the set of points within metric distance l of the boundary,
/// rasterised in metric-scaled coordinates.
MarginReport cell_margin_epsilon(const PhaseSpaceCell& cell, const Smearing& s, const PhysicalParams& params,
                                 double l);

struct BuildOptions {
  /// Margin length; default_margin_length((A/LP)^{1/2}) when unset.
  std::optional<double> margin_l;
  /// Reject cells with epsilon >= 1. Sweeps into the quantum regime turn
  /// this off.
  bool enforce_regularity = true;
  /// Use the general quadrature even where the closed form applies.
  bool force_quadrature = false;
  /// Cap on the number of q quadrature nodes of the general path.
  std::size_t max_quadrature_nodes = 200000;
  Exec exec = Exec::parallel;
};

struct Quasiprojector {
  PhaseSpaceCell cell;
  Smearing smearing;
  GridOperator kernel;
  MarginReport margin;
  bool closed_form = false;
};

/// Errors: below_quantum_scale when L P < hbar, geometry when the cell plus
/// its smearing does not fit the grid, irregular_cell when enforcing
/// regularity and epsilon >= 1, memory_budget when the quadrature would
/// exceed max_quadrature_nodes, constraint_violation when Sigma > 4F.
Quasiprojector build_projector(const PhaseSpaceCell& cell, const Smearing& s, const PhysicalParams& params,
                               const GridSpec& spec, const BuildOptions& opts = {});

/// Symbol table of P on the conjugate grid of `spec` (before quantisation).
WeylSymbol projector_symbol(const PhaseSpaceCell& cell, const Smearing& s, const PhysicalParams& params,
                            const GridSpec& spec, const BuildOptions& opts = {});

double projector_trace(const Quasiprojector& p);

/// Tr |P - P^2| on the matrix lattice.
double idempotency_defect(const Quasiprojector& p);

/// Tr |P - P'| for two projectors on the same cell (misuse otherwise).
double projector_distance(const Quasiprojector& a, const Quasiprojector& b);

/// Tr |P1 P2 - P12|.
double product_defect(const Quasiprojector& p1, const Quasiprojector& p2, const Quasiprojector& p12);

/// I - P with I the identity on the grid box.
GridOperator complement(const Quasiprojector& p);

enum class FlowDirection { forward, backward };

struct TransportResult {
  PhaseSpaceCell cell;
  double area_ratio = 1.0;
};

/// Advects the sampled boundary (at least 256 points) with the classical
/// dissipative flow by RK4. Forward: qdot = p/M, pdot = -V' - 2 gamma p.
/// Backward: qdot = -p/M, pdot = V' + 2 gamma p. Throws
/// non_regular_evolution when the transported boundary self-intersects.
TransportResult transport_cell(const PhaseSpaceCell& cell, const PotentialModel& pot, const PhysicalParams& params,
                               double t, FlowDirection direction = FlowDirection::forward,
                               int boundary_points = 512);

struct DecoyGap {
  std::string label;
  double hs_gap = 0.0;
};

struct EvolvedComparison {
  PhaseSpaceCell reference_cell;
  double hs_gap = 0.0;
  double bound_ref = 0.0;
  double epsilon_prime = 0.0;
  double area = 0.0;
  double trace_initial = 0.0;
  double support_loss = 0.0;
  Smearing reference_smearing;
  std::vector<DecoyGap> decoys;
};

/// Evolves the projector kernel with the Heisenberg propagator for time t
/// and compares it (HS distance) with the projector built on the
/// backward-flow image of the cell, smeared with the backward-ODE Gaussian
/// parameters. Also measures the gap to four decoy cells: the untransported
/// cell, the forward-transported cell, and the reference cell shifted by L/4
/// in q and rotated by pi/8 about its centroid (in units of L and P).
/// bound_ref = eps' Tr P with eps' = (A(t)/LP)^{1/2}. At t = 0 the
/// reference is the projector itself and no decoys are built.
EvolvedComparison evolved_projector_comparison(const Quasiprojector& p, const PotentialModel& pot,
                                               const PhysicalParams& params, double t, const PropagatorConfig& cfg,
                                               bool with_decoys = true, double support_loss_slack = 1e-8);

/// mu = (1 + eps_after)/(1 + eps_before); both must lie in (0, 1).
double effective_growth_mu(double epsilon_before, double epsilon_after);

}  // namespace qbm
