#include "qbm/grid/lattice.hpp"

#include <cmath>
#include <sstream>

namespace qbm {

namespace {

// Grid indices of matrix element (a, b) on each sublattice.
struct Index {
  int i, j;
};

Index even_index(int a, int b, int n_x) { return {a + b, a - b + n_x}; }
Index odd_index(int a, int b, int n_x) { return {a + b + 1, a - b + n_x}; }

bool inside(const Index& ix, const GridSpec& g) { return ix.i >= 0 && ix.i < g.n_u && ix.j >= 0 && ix.j < g.n_s; }

Eigen::MatrixXcd extract(const GridOperator& k, Sublattice which) {
  const auto& g = k.spec();
  const int n_x = lattice_size(g);
  const double h = g.ds();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n_x, n_x);
  for (int b = 0; b < n_x; ++b) {
    for (int a = 0; a < n_x; ++a) {
      const Index ix = which == Sublattice::even ? even_index(a, b, n_x) : odd_index(a, b, n_x);
      if (inside(ix, g)) m(a, b) = k(ix.i, ix.j) * h;
    }
  }
  return m;
}

void deposit(GridOperator& k, const Eigen::MatrixXcd& m, Sublattice which) {
  const auto& g = k.spec();
  const int n_x = lattice_size(g);
  const double inv_h = 1.0 / g.ds();
  for (int b = 0; b < n_x; ++b) {
    for (int a = 0; a < n_x; ++a) {
      const Index ix = which == Sublattice::even ? even_index(a, b, n_x) : odd_index(a, b, n_x);
      if (inside(ix, g)) k(ix.i, ix.j) = m(a, b) * inv_h;
    }
  }
}

}  // namespace

int lattice_size(const GridSpec& g) {
  const bool ok = g.n_u == g.n_s && std::abs(g.l_s - 2.0 * g.l_u) <= 1e-12 * g.l_s;
  if (!ok) {
    std::ostringstream os;
    os << "grid is not a matrix lattice (need N_u = N_s and L_s = 2 L_u; got N_u=" << g.n_u << " N_s=" << g.n_s
       << " L_u=" << g.l_u << " L_s=" << g.l_s << ")";
    throw Error(ErrorKind::geometry, os.str());
  }
  return g.n_u / 2;
}

Eigen::MatrixXcd to_matrix(const GridOperator& k, Sublattice which) { return extract(k, which); }

LatticePair to_matrices(const GridOperator& k) {
  return {extract(k, Sublattice::even), extract(k, Sublattice::odd)};
}

GridOperator from_matrices(const LatticePair& m, const GridSpec& spec, bool hermitian_hint) {
  const int n_x = lattice_size(spec);
  if (m.even.rows() != n_x || m.even.cols() != n_x || m.odd.rows() != n_x || m.odd.cols() != n_x) {
    throw Error(ErrorKind::geometry, "matrix size does not match the lattice");
  }
  GridOperator k(spec, hermitian_hint);
  deposit(k, m.even, Sublattice::even);
  deposit(k, m.odd, Sublattice::odd);
  return k;
}

GridOperator compose(const GridOperator& a, const GridOperator& b) {
  require_same_grid(a, b);
  const auto ma = to_matrices(a);
  const auto mb = to_matrices(b);
  LatticePair prod{ma.even * mb.even, ma.odd * mb.odd};
  return from_matrices(prod, a.spec(), false);
}

double trace_norm(const GridOperator& k) {
  const Eigen::MatrixXcd m = to_matrix(k, Sublattice::even);
  if (k.hermitian_hint()) {
    const Eigen::MatrixXcd herm = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
  }
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues().sum();
}

Eigen::VectorXd hermitian_eigenvalues(const GridOperator& k) {
  if (!k.hermitian_hint()) throw Error(ErrorKind::misuse, "eigenvalues need a Hermitian operator");
  const Eigen::MatrixXcd m = to_matrix(k, Sublattice::even);
  const Eigen::MatrixXcd herm = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double min_eigenvalue(const GridOperator& k) { return hermitian_eigenvalues(k).minCoeff(); }

}  // namespace qbm
