#pragma once

// Operator kernels sampled on a (u, s) lattice, u = (x+y)/2, s = x-y:
//   u_i = -L_u + i du,  s_j = -L_s + j ds,  i < N_u, j < N_s.
// Storage is row-major with u as the slow index; s = 0 sits at j = N_s/2.

#include <cstddef>
#include <cstdlib>
#include <new>
#include <vector>

#include "qbm/core.hpp"

namespace qbm {

template <class T, std::size_t Align = 64>
struct AlignedAllocator {
  using value_type = T;
  template <class U>
  struct rebind {
    using other = AlignedAllocator<U, Align>;
  };

  AlignedAllocator() noexcept = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U, Align>&) noexcept {}

  T* allocate(std::size_t n) {
    const std::size_t bytes = (n * sizeof(T) + Align - 1) / Align * Align;
    void* p = std::aligned_alloc(Align, bytes);
    if (!p) throw std::bad_alloc();
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) noexcept { std::free(p); }

  template <class U>
  bool operator==(const AlignedAllocator<U, Align>&) const noexcept { return true; }
};

using cvector = std::vector<cplx, AlignedAllocator<cplx>>;
using rvector = std::vector<double, AlignedAllocator<double>>;

struct GridSpec {
  int n_u = 256;
  int n_s = 256;
  double l_u = 12.0;
  double l_s = 12.0;

  GridSpec() = default;
  /// Throws constraint_violation unless n_u, n_s are powers of two >= 32
  /// and the half-extents are positive.
  GridSpec(int n_u, int n_s, double l_u, double l_s);

  /// Lattice on which to_matrix maps onto an N_x x N_x matrix with
  /// x in [-L_x, L_x): N_u = N_s = 2 N_x, L_u = L_x, L_s = 2 L_x.
  static GridSpec for_matrix(int n_x, double l_x);

  double du() const noexcept { return 2.0 * l_u / n_u; }
  double ds() const noexcept { return 2.0 * l_s / n_s; }
  double u(int i) const noexcept { return -l_u + i * du(); }
  double s(int j) const noexcept { return -l_s + j * ds(); }
  int s_zero() const noexcept { return n_s / 2; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(n_u) * n_s; }

  /// Angular wavenumber of FFT bin m (FFT ordering) along u or s.
  double k_u(int m) const noexcept;
  double k_s(int m) const noexcept;
  double k_s_max() const noexcept { return pi / ds(); }

  bool operator==(const GridSpec&) const = default;
};

class GridOperator {
 public:
  GridOperator() = default;
  explicit GridOperator(const GridSpec& spec, bool hermitian_hint = false);

  const GridSpec& spec() const noexcept { return spec_; }
  bool hermitian_hint() const noexcept { return hermitian_; }
  void set_hermitian_hint(bool h) noexcept { hermitian_ = h; }

  cplx& operator()(int i, int j) noexcept { return data_[static_cast<std::size_t>(i) * spec_.n_s + j]; }
  cplx operator()(int i, int j) const noexcept {
    return data_[static_cast<std::size_t>(i) * spec_.n_s + j];
  }
  cplx* data() noexcept { return data_.data(); }
  const cplx* data() const noexcept { return data_.data(); }
  cplx* row(int i) noexcept { return data_.data() + static_cast<std::size_t>(i) * spec_.n_s; }
  const cplx* row(int i) const noexcept { return data_.data() + static_cast<std::size_t>(i) * spec_.n_s; }
  std::size_t size() const noexcept { return data_.size(); }

  /// du * sum_i K(u_i, 0).
  cplx trace() const;
  double max_abs() const;
  /// max |K(u, -s) - conj K(u, s)| / max |K| over the points whose mirror
  /// lies on the grid.
  double hermitian_residual() const;

  GridOperator& operator+=(const GridOperator& o);
  GridOperator& operator-=(const GridOperator& o);
  GridOperator& operator*=(cplx c);

 private:
  GridSpec spec_;
  cvector data_;
  bool hermitian_ = false;
};

GridOperator operator+(GridOperator a, const GridOperator& b);
GridOperator operator-(GridOperator a, const GridOperator& b);
GridOperator operator*(cplx c, GridOperator a);

/// Throws misuse when the two operators live on different lattices.
void require_same_grid(const GridOperator& a, const GridOperator& b);

/// Hilbert-Schmidt norm sqrt(du ds sum |K|^2).
double hs_norm(const GridOperator& k);
double hs_distance(const GridOperator& a, const GridOperator& b);

/// Tr(AB) = du ds sum A(u, s) B(u, -s).
cplx trace_product(const GridOperator& a, const GridOperator& b);

/// Kernel of the identity: K(u, 0) = 1/ds, zero elsewhere.
GridOperator identity_operator(const GridSpec& spec);

}  // namespace qbm
