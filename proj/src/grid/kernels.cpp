#include "qbm/grid/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace qbm::kernels {

namespace {

// e^{i pi t} with t reduced mod 2 first so large arguments keep their digits.
cplx unit_phase_pi(double t) {
  t -= 2.0 * std::floor(0.5 * t);
  return std::polar(1.0, pi * t);
}

constexpr double index_tol = 1e-9;

}  // namespace

void multiply(cplx* data, const cplx* factor, std::size_t n, Exec exec) {
  const auto count = static_cast<std::ptrdiff_t>(n);
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < count; ++k) data[k] *= factor[k];
  } else {
    for (std::ptrdiff_t k = 0; k < count; ++k) data[k] *= factor[k];
  }
}

RowFft::RowFft(int rows, int cols, int sign) : plan_(cols, sign), rows_(rows), cols_(cols) {}

void RowFft::apply(cplx* data, Exec exec) const {
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < rows_; ++i) plan_.execute(data + static_cast<std::size_t>(i) * cols_);
  } else {
    for (int i = 0; i < rows_; ++i) plan_.execute(data + static_cast<std::size_t>(i) * cols_);
  }
}

ColumnFft::ColumnFft(int rows, int cols, int sign)
    : plan_(rows, sign, chunk, cols, 1), rows_(rows), cols_(cols) {
  if (cols % chunk != 0) throw Error(ErrorKind::misuse, "column FFT needs cols divisible by 8");
}

void ColumnFft::apply(cplx* data, Exec exec) const {
  const int chunks = cols_ / chunk;
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (int c = 0; c < chunks; ++c) plan_.execute(data + c * chunk);
  } else {
    for (int c = 0; c < chunks; ++c) plan_.execute(data + c * chunk);
  }
}

AffineResampler::AffineResampler(int n, double a)
    : n_(n), a_(a), fwd_n_(n, -1), fwd_2n_(2 * n, -1), bwd_2n_(2 * n, +1) {
  if (!(a > 0.0)) throw Error(ErrorKind::misuse, "affine resample needs a > 0");
  const int half = n / 2;
  pre_chirp_.resize(n + 1);
  keep_.resize(n + 1);
  for (int mp = 0; mp <= n; ++mp) {
    const double m = mp - half;
    pre_chirp_[mp] = unit_phase_pi(a * m * m / n);
    keep_[mp] = std::abs(a * m) <= half * (1.0 + 1e-12);
  }
  post_chirp_.resize(n);
  const double norm = 1.0 / (static_cast<double>(n) * 2.0 * n);
  for (int j = 0; j < n; ++j) post_chirp_[j] = unit_phase_pi(a * double(j) * j / n) * norm;
  kernel_hat_.assign(2 * n, cplx(0.0, 0.0));
  for (int k = 0; k < 2 * n; ++k) {
    const double shift = (k < n ? k : k - 2 * n) + half;
    kernel_hat_[k] = unit_phase_pi(-a * shift * shift / n);
  }
  fwd_2n_.execute(kernel_hat_.data());
}

AffineResampler::Workspace AffineResampler::workspace() const {
  return {cvector(n_), cvector(2 * n_)};
}

double AffineResampler::apply(cplx* row, double beta, Workspace& ws) const {
  const int n = n_;
  const int half = n / 2;
  double lost = 0.0;

  // Source samples never reached by any target are discarded.
  const double x_lo = std::min(beta, a_ * (n - 1) + beta);
  const double x_hi = std::max(beta, a_ * (n - 1) + beta);
  for (int m = 0; m < n; ++m) {
    if (m < x_lo - 1.0 || m > x_hi + 1.0) lost += std::norm(row[m]);
  }

  std::copy(row, row + n, ws.coeff.begin());
  fwd_n_.execute(ws.coeff.data());

  auto& conv = ws.conv;
  std::fill(conv.begin(), conv.end(), cplx(0.0, 0.0));
  for (int mp = 0; mp <= n; ++mp) {
    const int m = mp - half;
    const int idx = (m + n) % n;
    cplx c = ws.coeff[idx];
    if (mp == 0 || mp == n) c *= 0.5;
    if (!keep_[mp]) {
      if (mp != n) lost += std::norm(ws.coeff[idx]) / n;
      continue;
    }
    const double t = 2.0 * m * beta / n;
    conv[mp] = c * unit_phase_pi(t) * pre_chirp_[mp];
  }
  fwd_2n_.execute(conv.data());
  for (int k = 0; k < 2 * n; ++k) conv[k] *= kernel_hat_[k];
  bwd_2n_.execute(conv.data());

  for (int j = 0; j < n; ++j) {
    const double x = a_ * j + beta;
    row[j] = (x < -index_tol || x > n + index_tol) ? cplx(0.0, 0.0) : conv[j] * post_chirp_[j];
  }
  return lost;
}

double affine_resample_rows(cplx* data, int rows, const AffineResampler& r, const double* beta,
                            const double* weight, Exec exec) {
  const int n = r.length();
  std::vector<double> lost(rows, 0.0);
  auto body = [&](int i, AffineResampler::Workspace& ws) {
    cplx* row = data + static_cast<std::size_t>(i) * n;
    lost[i] = r.apply(row, beta[i], ws);
    const double* w = weight + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) row[j] *= w[j];
  };
  if (exec == Exec::parallel) {
#pragma omp parallel
    {
      auto ws = r.workspace();
#pragma omp for schedule(static)
      for (int i = 0; i < rows; ++i) body(i, ws);
    }
  } else {
    auto ws = r.workspace();
    for (int i = 0; i < rows; ++i) body(i, ws);
  }
  double total = 0.0;
  for (double v : lost) total += v;
  return total;
}

double sum_norm(const cplx* data, int rows, int cols, Exec exec) {
  std::vector<double> partial(rows, 0.0);
  auto body = [&](int i) {
    const cplx* row = data + static_cast<std::size_t>(i) * cols;
    double acc = 0.0;
    for (int j = 0; j < cols; ++j) acc += std::norm(row[j]);
    partial[i] = acc;
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < rows; ++i) body(i);
  } else {
    for (int i = 0; i < rows; ++i) body(i);
  }
  double total = 0.0;
  for (double v : partial) total += v;
  return total;
}

namespace reference {

std::vector<cplx> dft(const std::vector<cplx>& x, int sign) {
  const auto n = static_cast<int>(x.size());
  std::vector<cplx> out(n);
  for (int k = 0; k < n; ++k) {
    cplx acc = 0.0;
    for (int j = 0; j < n; ++j) {
      const long long kj = static_cast<long long>(k) * j % n;
      acc += x[j] * std::polar(1.0, sign * 2.0 * pi * static_cast<double>(kj) / n);
    }
    out[k] = acc;
  }
  return out;
}

std::vector<cplx> affine_resample(const std::vector<cplx>& row, double a, double beta) {
  const int n = static_cast<int>(row.size());
  const int half = n / 2;
  const auto c = dft(row, -1);
  std::vector<cplx> out(n);
  for (int j = 0; j < n; ++j) {
    const double x = a * j + beta;
    if (x < -index_tol || x > n + index_tol) continue;
    cplx acc = 0.0;
    for (int m = -half; m <= half; ++m) {
      if (std::abs(a * m) > half * (1.0 + 1e-12)) continue;
      cplx cm = c[(m + n) % n];
      if (m == -half || m == half) cm *= 0.5;
      acc += cm * std::polar(1.0, 2.0 * pi * m * x / n);
    }
    out[j] = acc / static_cast<double>(n);
  }
  return out;
}

void multiply(cplx* data, const cplx* factor, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) data[k] = data[k] * factor[k];
}

}  // namespace reference

}  // namespace qbm::kernels
