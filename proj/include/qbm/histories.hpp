#pragma once

// Decoherence functional of phase-space histories. Branch operators
// P_a1 rho P_a1' are evolved in the Schrodinger picture between the
// projection times; the table carries the final-time Kronecker delta.

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "qbm/core.hpp"
#include "qbm/grid/grid.hpp"
#include "qbm/grid/propagator.hpp"

namespace qbm {

struct MarkovGuard {
  double ratio = 0.0;
  bool ok = false;
  /// False at kT = 0, where the Markov time hbar/kT is infinite.
  bool applicable = true;
};

/// ratio = spacing / (hbar / kT), ok when ratio > 1.
MarkovGuard markov_guard(const PhysicalParams& params, double spacing);

struct HistoryAlphabet {
  std::vector<double> times;
  /// projectors[k] is the partition used at times[k].
  std::vector<std::vector<GridOperator>> projectors;

  /// Throws misuse unless times increase, every list is non-empty and every
  /// kernel shares one lattice; throws constraint_violation when a list
  /// misses the identity by more than tau_part of its HS norm.
  void validate(double tau_part = 1e-3) const;
  std::size_t history_count() const;
};

enum class TableMode { full, diagonal };

struct HistoryOptions {
  TableMode mode = TableMode::full;
  double tau_part = 1e-3;
  /// Fill D(h', h) as conj D(h, h') instead of evolving both branches.
  bool use_adjoint_symmetry = true;
  /// Refuse full tables with more histories than this.
  std::size_t max_histories = 10000;
};

struct DecoherenceTable {
  /// histories[h][k] is the alphabet index chosen at time k.
  std::vector<std::vector<int>> histories;
  Eigen::MatrixXcd D;
  TableMode mode = TableMode::full;
  std::vector<double> probabilities;  // Re D(h, h)
  std::vector<double> clipped;        // probabilities clipped to [0, 1]
  bool clipping_applied = false;
  double max_imag_diagonal = 0.0;
  MarkovGuard guard;
  std::vector<std::string> warnings;

  int index_of(const std::vector<int>& history) const;
  double total_probability() const;
};

/// Two-time table over (P1_a, P2_b); rho0 is given at t = 0 and evolved to
/// t1 first.
DecoherenceTable decoherence_functional_two_time(const std::vector<GridOperator>& p1,
                                                 const std::vector<GridOperator>& p2, const GridOperator& rho0,
                                                 const PotentialModel& pot, const PhysicalParams& params, double t1,
                                                 double t2, const PropagatorConfig& cfg,
                                                 const HistoryOptions& opts = {});

/// Nested sandwich / evolve recursion over the alphabet's time chain.
/// Throws cost_guard when a full table would exceed opts.max_histories.
DecoherenceTable n_time_functional(const HistoryAlphabet& alphabet, const GridOperator& rho0,
                                   const PotentialModel& pot, const PhysicalParams& params,
                                   const PropagatorConfig& cfg, const HistoryOptions& opts = {});

/// kappa = max over h != h' of |Re D(h, h')| / sum_h D(h, h).
double consistency_epsilon(const DecoherenceTable& table);
/// Same with |D(h, h')|.
double consistency_epsilon_abs(const DecoherenceTable& table);

struct ConditionalProbability {
  double raw = 0.0;
  double clipped = 0.0;
};

/// p(to | from) = p(from, to) / sum_b p(from, b) on a two-time table.
/// Throws undefined_conditional when the marginal vanishes.
ConditionalProbability conditional_probability(const DecoherenceTable& table, int from_index, int to_index);

}  // namespace qbm
