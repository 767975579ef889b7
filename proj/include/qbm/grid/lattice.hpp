#pragma once

// Dense-matrix view of kernels on a GridSpec::for_matrix lattice. The (u, s)
// grid holds two interleaved x-lattices: the even one x_a = -L_x + a h and
// the odd one shifted by h/2, with h = 2 L_x / N_x. Points of the (u, s)
// grid that fall outside both N_x x N_x squares are not represented.

#include <Eigen/Dense>

#include "qbm/grid/grid.hpp"

namespace qbm {

enum class Sublattice { even, odd };

struct LatticePair {
  Eigen::MatrixXcd even;
  Eigen::MatrixXcd odd;
};

/// Throws geometry unless N_u = N_s = 2 N_x, L_s = 2 L_u.
int lattice_size(const GridSpec& spec);

/// M_ab = K((x_a + x_b)/2, x_a - x_b) h.
Eigen::MatrixXcd to_matrix(const GridOperator& k, Sublattice which = Sublattice::even);
LatticePair to_matrices(const GridOperator& k);

/// Inverse of to_matrices; grid points outside both squares are zero.
GridOperator from_matrices(const LatticePair& m, const GridSpec& spec, bool hermitian_hint = false);

/// Operator product A B, evaluated on both sublattices.
GridOperator compose(const GridOperator& a, const GridOperator& b);

/// Tr |K| from the even sublattice (Hermitian eigenvalues when the hint is
/// set, singular values otherwise).
double trace_norm(const GridOperator& k);

/// Eigenvalues of a Hermitian kernel on the even sublattice, ascending.
Eigen::VectorXd hermitian_eigenvalues(const GridOperator& k);
double min_eigenvalue(const GridOperator& k);

}  // namespace qbm
