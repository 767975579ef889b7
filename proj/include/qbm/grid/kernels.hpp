#pragma once

// Data-parallel building blocks of the grid propagator. Every kernel has a
// serial and an OpenMP path that produce bitwise-identical results (work is
// split by whole rows/column chunks and nothing is reduced across threads),
// plus a naive O(N^2) reference used only by tests and the benchmark.

#include <cstddef>
#include <vector>

#include "qbm/grid/fft.hpp"
#include "qbm/grid/grid.hpp"

namespace qbm {

enum class Exec { serial, parallel };

namespace kernels {

/// data[k] *= factor[k].
void multiply(cplx* data, const cplx* factor, std::size_t n, Exec exec);

/// In-place FFT of every row of a rows x cols array.
class RowFft {
 public:
  RowFft(int rows, int cols, int sign);
  void apply(cplx* data, Exec exec) const;

 private:
  FftPlan plan_;
  int rows_, cols_;
};

/// In-place FFT along the slow index of a rows x cols array, processed in
/// fixed chunks of adjacent columns.
class ColumnFft {
 public:
  static constexpr int chunk = 8;
  ColumnFft(int rows, int cols, int sign);
  void apply(cplx* data, Exec exec) const;

 private:
  FftPlan plan_;
  int rows_, cols_;
};

/// Evaluates the periodic trigonometric interpolant of an N-sample row at
/// fractional indices x_j = a j + beta (j < N) with a Bluestein chirp-z
/// convolution. Frequencies with |a m| > N/2 are removed first (they cannot
/// be represented after the stretch) and points whose source x_j falls
/// outside the periodic cell [0, N] are set to zero; the cell is symmetric
/// under j -> N - j, which keeps Hermitian kernels Hermitian.
class AffineResampler {
 public:
  AffineResampler(int n, double a);

  int length() const noexcept { return n_; }
  double scale() const noexcept { return a_; }

  struct Workspace {
    cvector coeff;
    cvector conv;
  };
  Workspace workspace() const;

  /// Resamples `row` in place; returns the squared norm (sum |g|^2 units)
  /// discarded by the spectral filter and by the support mask.
  double apply(cplx* row, double beta, Workspace& ws) const;

 private:
  int n_;
  double a_;
  FftPlan fwd_n_, fwd_2n_, bwd_2n_;
  cvector pre_chirp_;   // e^{i pi a m^2/N}, m = -N/2..N/2
  cvector post_chirp_;  // e^{i pi a j^2/N} / (N * 2N)
  cvector kernel_hat_;  // FFT of e^{-i pi a n^2/N}, wrapped to length 2N
  std::vector<char> keep_;
};

/// Applies `r` to every row with its own shift beta[row], then multiplies
/// by weight[row * cols + j]. Returns the total discarded squared norm.
double affine_resample_rows(cplx* data, int rows, const AffineResampler& r, const double* beta,
                            const double* weight, Exec exec);

/// sum |data|^2, accumulated per row and then over rows in order.
double sum_norm(const cplx* data, int rows, int cols, Exec exec);

namespace reference {

/// Direct DFT, sum_n x_n e^{sign 2 pi i k n / N}.
std::vector<cplx> dft(const std::vector<cplx>& x, int sign);

/// Direct evaluation of the same filtered, masked interpolant as
/// AffineResampler.
std::vector<cplx> affine_resample(const std::vector<cplx>& row, double a, double beta);

void multiply(cplx* data, const cplx* factor, std::size_t n);

}  // namespace reference

}  // namespace kernels
}  // namespace qbm
