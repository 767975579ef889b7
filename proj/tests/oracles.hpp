#pragma once

// Independent reference computations for the unit tests. Nothing here calls
// into the library beyond plain value types.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;
inline constexpr double pi = 3.14159265358979323846;

struct Gauss {
  double sigma, F, r, q, p;
};

// <x|rho|y> written directly in x, y.
inline cplx kernel_xy(const Gauss& g, double hbar, double x, double y) {
  const double c = 0.5 * (x + y) - g.q;
  const double d = x - y;
  const double re = -g.sigma / (2 * hbar) * c * c - g.F / (2 * hbar) * d * d;
  const double im = -g.r * g.sigma / (2 * hbar) * c * d + g.p / hbar * d;
  return std::sqrt(g.sigma / (2 * pi * hbar)) * std::exp(cplx(re, im));
}

// Composite Simpson on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

// Moments by quadrature of the x-y kernel: Tr rho, <x>, <x^2>, <p>, <p^2>,
// <(xp+px)/2>, with derivatives by centred differences in x.
struct Moments {
  double trace, x, x2, p, p2, xp;
};

inline Moments quadrature_moments(const Gauss& g, double hbar, double half_width, int n) {
  const double e = 1e-4;
  auto k = [&](double x, double y) { return kernel_xy(g, hbar, x, y); };
  auto dx = [&](double x) { return (k(x + e, x) - k(x - e, x)) / (2 * e); };
  auto dxx = [&](double x) { return (k(x + e, x) - 2.0 * k(x, x) + k(x - e, x)) / (e * e); };
  Moments m{};
  const double a = g.q - half_width, b = g.q + half_width;
  m.trace = simpson([&](double x) { return k(x, x).real(); }, a, b, n);
  m.x = simpson([&](double x) { return x * k(x, x).real(); }, a, b, n) / m.trace;
  m.x2 = simpson([&](double x) { return x * x * k(x, x).real(); }, a, b, n) / m.trace;
  m.p = simpson([&](double x) { return (cplx(0, -hbar) * dx(x)).real(); }, a, b, n) / m.trace;
  m.p2 = simpson([&](double x) { return (-hbar * hbar * dxx(x)).real(); }, a, b, n) / m.trace;
  // <xp> = int x (-i hbar d_x rho)(x, x); symmetrised = <xp> - i hbar/2.
  m.xp = simpson([&](double x) { return (x * cplx(0, -hbar) * dx(x)).real(); }, a, b, n) / m.trace;
  return m;
}

// Tr rho^2 = int int |rho(x, y)|^2 by 2-D Simpson.
inline double quadrature_purity(const Gauss& g, double hbar, double half_width, int n) {
  auto inner = [&](double x) {
    return simpson([&](double y) { return std::norm(kernel_xy(g, hbar, x, y)); }, g.q - half_width,
                   g.q + half_width, n);
  };
  return simpson(inner, g.q - half_width, g.q + half_width, n);
}

// Covariance of a Gaussian in the five-parameter form.
inline Eigen::Matrix2d covariance(const Gauss& g, double hbar) {
  Eigen::Matrix2d c;
  const double dq2 = hbar / g.sigma;
  const double cpq = -hbar * g.r / 2.0;
  const double dp2 = hbar * g.F + cpq * cpq / dq2;
  c << dq2, cpq, cpq, dp2;
  return c;
}

// Tr(rho1 rho2) = hbar exp(-d^T (C1 + C2)^{-1} d / 2) / sqrt(det(C1 + C2)).
inline double gaussian_overlap(const Gauss& a, const Gauss& b, double hbar) {
  const Eigen::Matrix2d c = covariance(a, hbar) + covariance(b, hbar);
  Eigen::Vector2d d(a.q - b.q, a.p - b.p);
  return hbar * std::exp(-0.5 * d.dot(c.inverse() * d)) / std::sqrt(c.determinant());
}

// Second moments (dq2, dp2, cpq) under harmonic + bath: the linear system
//   d/dt [dq2, cpq, dp2] = A x + b, solved exactly through eigenvectors.
inline Eigen::Vector3d harmonic_moments(double m, double m_omega2, double gamma, double kT,
                                        const Eigen::Vector3d& x0, double t) {
  Eigen::Matrix3d a;
  a << 0, 2.0 / m, 0,                  //
      -m_omega2, -2.0 * gamma, 1.0 / m,  //
      0, -2.0 * m_omega2, -4.0 * gamma;
  Eigen::Vector3d b(0, 0, 4.0 * m * gamma * kT);
  const Eigen::Vector3d fixed = -a.colPivHouseholderQr().solve(b);
  Eigen::EigenSolver<Eigen::Matrix3d> es(a);
  const Eigen::Matrix3cd v = es.eigenvectors();
  const Eigen::Vector3cd lam = es.eigenvalues();
  const Eigen::Vector3cd c = v.fullPivLu().solve((x0 - fixed).cast<cplx>());
  Eigen::Vector3cd out = Eigen::Vector3cd::Zero();
  for (int k = 0; k < 3; ++k) out += c(k) * std::exp(lam(k) * t) * v.col(k);
  return out.real() + fixed;
}

// Spectrum of a Gaussian state of Wigner area A: lambda_n = (1 - k) k^n,
// k = (2A - hbar)/(2A + hbar).
inline double gaussian_eigenvalue(double area, double hbar, int n) {
  const double k = (2 * area - hbar) / (2 * area + hbar);
  return (1 - k) * std::pow(k, n);
}

// Kernel of the smeared projector int_Gamma dq dp/(2 pi hbar) rho_{q,p}(x, y)
// by nested Simpson over a convex polygon, splitting q at the vertices.
inline cplx projector_kernel(const std::vector<std::pair<double, double>>& poly, const Gauss& smear, double hbar,
                             double x, double y, int n) {
  std::vector<double> qs;
  for (const auto& v : poly) qs.push_back(v.first);
  std::sort(qs.begin(), qs.end());
  auto p_range = [&](double q, double& lo, double& hi) {
    lo = 1e300, hi = -1e300;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const auto a = poly[i], b = poly[(i + 1) % poly.size()];
      if ((a.first - q) * (b.first - q) <= 0.0 && a.first != b.first) {
        const double p = a.second + (q - a.first) * (b.second - a.second) / (b.first - a.first);
        lo = std::min(lo, p), hi = std::max(hi, p);
      }
    }
  };
  auto at = [&](double q, double p) {
    Gauss g = smear;
    g.q = q, g.p = p;
    return kernel_xy(g, hbar, x, y);
  };
  auto w = [n](int i) { return (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0); };
  cplx total = 0.0;
  for (std::size_t k = 0; k + 1 < qs.size(); ++k) {
    if (qs[k + 1] - qs[k] < 1e-14) continue;
    const double hq = (qs[k + 1] - qs[k]) / n;
    cplx panel = 0.0;
    for (int i = 0; i <= n; ++i) {
      // End nodes nudged inside so the vertical line meets two edges.
      const double q = std::clamp(qs[k] + i * hq, qs[k] + 1e-12, qs[k + 1] - 1e-12);
      double lo, hi;
      p_range(q, lo, hi);
      if (!(hi > lo)) continue;
      const double hp = (hi - lo) / n;
      cplx inner = 0.0;
      for (int j = 0; j <= n; ++j) inner += at(q, lo + j * hp) * w(j);
      panel += inner * (hp / 3.0) * w(i);
    }
    total += panel * (hq / 3.0);
  }
  return total / (2 * pi * hbar);
}

}  // namespace oracle
