#pragma once

// Domain values shared by every solver: bath/system constants, the
// five-parameter Gaussian density matrix, its physical moments and the
// closed family of potentials.

#include <array>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "qbm/error.hpp"

namespace qbm {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;

/// Bath and system constants. The diffusion coefficient D = 2 M gamma kT is
/// derived on access and cannot be set independently.
class PhysicalParams {
 public:
  PhysicalParams() = default;
  PhysicalParams(double mass, double gamma, double kT, double hbar, double eta = 0.0);

  double mass() const noexcept { return mass_; }
  double gamma() const noexcept { return gamma_; }
  double kT() const noexcept { return kT_; }
  double hbar() const noexcept { return hbar_; }
  double eta() const noexcept { return eta_; }
  double diffusion() const noexcept { return 2.0 * mass_ * gamma_ * kT_; }

  PhysicalParams with_hbar(double hbar) const;
  PhysicalParams with_eta(double eta) const;

 private:
  double mass_ = 1.0;
  double gamma_ = 0.0;
  double kT_ = 0.0;
  double hbar_ = 1.0;
  double eta_ = 0.0;
};

/// Gaussian density matrix
///   <x|rho|y> = sqrt(S/2 pi hbar) exp[-S(u-q)^2/2hbar - F s^2/2hbar
///               - i r S (u-q) s/2hbar + i p s/hbar],  u=(x+y)/2, s=x-y,
/// valid for S > 0, F > 0, S <= 4F.
struct GaussianState {
  double sigma = 1.0;
  double F = 0.25;
  double r = 0.0;
  double q = 0.0;
  double p = 0.0;
};

/// Throws ErrorKind::constraint_violation unless sigma > 0, F > 0 and
/// sigma <= 4F (1 + slack).
void validate(const GaussianState& state, double slack = 0.0);

struct MomentSet {
  double dq2 = 0.0;
  double dp2 = 0.0;
  double cpq = 0.0;
  double q = 0.0;
  double p = 0.0;

  /// Wigner-function area sqrt(dq2 dp2 - cpq^2).
  double area() const;
  double purity(double hbar) const { return hbar / (2.0 * area()); }
};

MomentSet moments_from_params(const GaussianState& state, const PhysicalParams& params);

/// Inverse of moments_from_params. Throws subquantum_moments when the area
/// is below hbar/2.
GaussianState params_from_moments(const MomentSet& m, const PhysicalParams& params);

struct PurityArea {
  double purity = 1.0;
  double area = 0.5;
};

/// Tr rho^2 = sqrt(S/4F) and A = (hbar/2) sqrt(4F/S).
PurityArea purity_and_area(const GaussianState& state, const PhysicalParams& params);

/// Kernel value at mean coordinate u and difference s.
cplx eval_density(const GaussianState& state, const PhysicalParams& params, double u, double s);

struct PotentialValue {
  double v = 0.0;
  double dv = 0.0;
  double d2v = 0.0;
};

enum class PotentialFamily { free, linear, harmonic, quartic, polynomial };

/// Closed list of potentials with exact derivatives.
class PotentialModel {
 public:
  static constexpr int max_degree = 8;

  static PotentialModel free_particle();
  static PotentialModel linear(double slope);
  /// V = m_omega2 x^2 / 2.
  static PotentialModel harmonic(double m_omega2);
  /// V = m_omega2 x^2 / 2 + eta4 x^4.
  static PotentialModel quartic(double m_omega2, double eta4);
  /// V = sum_k c_k x^k, degree <= 8. Degree >= 2 must be even with a
  /// positive leading coefficient (bounded below).
  static PotentialModel polynomial(std::vector<double> coefficients);

  PotentialFamily family() const noexcept { return family_; }
  std::span<const double> coefficients() const noexcept { return coeffs_; }

  PotentialValue eval(double x) const;

  /// True when V'' does not depend on x.
  bool is_quadratic() const;

  std::string describe() const;

 private:
  PotentialModel(PotentialFamily family, std::vector<double> coeffs);

  PotentialFamily family_ = PotentialFamily::free;
  std::vector<double> coeffs_;  // power-series coefficients c_0..c_n
};

inline PotentialValue eval_potential(const PotentialModel& pot, double x) { return pot.eval(x); }

}  // namespace qbm
