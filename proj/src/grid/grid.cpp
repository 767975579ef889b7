#include "qbm/grid/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qbm {

namespace {

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

double fft_wavenumber(int m, int n, double extent) {
  const int mm = m < n / 2 ? m : m - n;
  return 2.0 * pi * mm / extent;
}

}  // namespace

GridSpec::GridSpec(int n_u_, int n_s_, double l_u_, double l_s_)
    : n_u(n_u_), n_s(n_s_), l_u(l_u_), l_s(l_s_) {
  if (!power_of_two(n_u) || !power_of_two(n_s) || n_u < 32 || n_s < 32 || !(l_u > 0.0) ||
      !(l_s > 0.0)) {
    std::ostringstream os;
    os << "grid spec invalid: N_u=" << n_u << " N_s=" << n_s << " L_u=" << l_u << " L_s=" << l_s
       << " (need powers of two >= 32 and positive extents)";
    throw Error(ErrorKind::constraint_violation, os.str());
  }
}

GridSpec GridSpec::for_matrix(int n_x, double l_x) { return GridSpec(2 * n_x, 2 * n_x, l_x, 2.0 * l_x); }

double GridSpec::k_u(int m) const noexcept { return fft_wavenumber(m, n_u, 2.0 * l_u); }
double GridSpec::k_s(int m) const noexcept { return fft_wavenumber(m, n_s, 2.0 * l_s); }

GridOperator::GridOperator(const GridSpec& spec, bool hermitian_hint)
    : spec_(spec), data_(spec.size(), cplx(0.0, 0.0)), hermitian_(hermitian_hint) {}

cplx GridOperator::trace() const {
  cplx acc = 0.0;
  const int j0 = spec_.s_zero();
  for (int i = 0; i < spec_.n_u; ++i) acc += (*this)(i, j0);
  return acc * spec_.du();
}

double GridOperator::max_abs() const {
  double m = 0.0;
  for (const auto& v : data_) m = std::max(m, std::abs(v));
  return m;
}

double GridOperator::hermitian_residual() const {
  const double scale = max_abs();
  if (scale == 0.0) return 0.0;
  double worst = 0.0;
  for (int i = 0; i < spec_.n_u; ++i) {
    for (int j = 1; j < spec_.n_s; ++j) {
      worst = std::max(worst, std::abs((*this)(i, spec_.n_s - j) - std::conj((*this)(i, j))));
    }
  }
  return worst / scale;
}

GridOperator& GridOperator::operator+=(const GridOperator& o) {
  require_same_grid(*this, o);
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
  hermitian_ = hermitian_ && o.hermitian_;
  return *this;
}

GridOperator& GridOperator::operator-=(const GridOperator& o) {
  require_same_grid(*this, o);
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
  hermitian_ = hermitian_ && o.hermitian_;
  return *this;
}

GridOperator& GridOperator::operator*=(cplx c) {
  for (auto& v : data_) v *= c;
  if (c.imag() != 0.0) hermitian_ = false;
  return *this;
}

GridOperator operator+(GridOperator a, const GridOperator& b) { return a += b; }
GridOperator operator-(GridOperator a, const GridOperator& b) { return a -= b; }
GridOperator operator*(cplx c, GridOperator a) { return a *= c; }

void require_same_grid(const GridOperator& a, const GridOperator& b) {
  if (!(a.spec() == b.spec())) throw Error(ErrorKind::misuse, "operators live on different grids");
}

double hs_norm(const GridOperator& k) {
  double acc = 0.0;
  for (std::size_t n = 0; n < k.size(); ++n) acc += std::norm(k.data()[n]);
  return std::sqrt(acc * k.spec().du() * k.spec().ds());
}

double hs_distance(const GridOperator& a, const GridOperator& b) {
  require_same_grid(a, b);
  double acc = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) acc += std::norm(a.data()[n] - b.data()[n]);
  return std::sqrt(acc * a.spec().du() * a.spec().ds());
}

cplx trace_product(const GridOperator& a, const GridOperator& b) {
  require_same_grid(a, b);
  const auto& g = a.spec();
  cplx acc = 0.0;
  for (int i = 0; i < g.n_u; ++i) {
    const cplx* ra = a.row(i);
    const cplx* rb = b.row(i);
    for (int j = 1; j < g.n_s; ++j) acc += ra[j] * rb[g.n_s - j];
  }
  return acc * g.du() * g.ds();
}

GridOperator identity_operator(const GridSpec& spec) {
  GridOperator id(spec, true);
  const int j0 = spec.s_zero();
  for (int i = 0; i < spec.n_u; ++i) id(i, j0) = 1.0 / spec.ds();
  return id;
}

}  // namespace qbm
