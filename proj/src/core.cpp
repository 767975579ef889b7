#include "qbm/core.hpp"

#include <cmath>
#include <sstream>

namespace qbm {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::constraint_violation: return "constraint violation";
    case ErrorKind::subquantum_moments: return "subquantum moments";
    case ErrorKind::breakdown: return "numerical breakdown";
    case ErrorKind::insufficient_data: return "insufficient data";
    case ErrorKind::aliasing: return "aliasing";
    case ErrorKind::geometry: return "geometry";
    case ErrorKind::misuse: return "misuse";
    case ErrorKind::below_quantum_scale: return "below quantum scale";
    case ErrorKind::irregular_cell: return "irregular cell";
    case ErrorKind::memory_budget: return "memory budget";
    case ErrorKind::non_regular_evolution: return "non-regular evolution";
    case ErrorKind::degenerate_input: return "degenerate input";
    case ErrorKind::undefined_conditional: return "undefined conditional";
    case ErrorKind::cost_guard: return "cost guard";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

PhysicalParams::PhysicalParams(double mass, double gamma, double kT, double hbar, double eta)
    : mass_(mass), gamma_(gamma), kT_(kT), hbar_(hbar), eta_(eta) {
  if (!(mass > 0.0) || !(hbar > 0.0) || !(gamma >= 0.0) || !(kT >= 0.0) || !(eta >= 0.0)) {
    std::ostringstream os;
    os << "physical params out of range: M=" << mass << " gamma=" << gamma << " kT=" << kT
       << " hbar=" << hbar << " eta=" << eta;
    throw Error(ErrorKind::constraint_violation, os.str());
  }
}

PhysicalParams PhysicalParams::with_hbar(double hbar) const {
  return PhysicalParams(mass_, gamma_, kT_, hbar, eta_);
}

PhysicalParams PhysicalParams::with_eta(double eta) const {
  return PhysicalParams(mass_, gamma_, kT_, hbar_, eta);
}

void validate(const GaussianState& s, double slack) {
  if (!(s.sigma > 0.0) || !(s.F > 0.0) || !(s.sigma <= 4.0 * s.F * (1.0 + slack)) ||
      !std::isfinite(s.r) || !std::isfinite(s.q) || !std::isfinite(s.p)) {
    std::ostringstream os;
    os.precision(17);
    os << "invalid gaussian state: Sigma=" << s.sigma << " F=" << s.F << " r=" << s.r
       << " (requires Sigma > 0, F > 0, Sigma <= 4F)";
    throw Error(ErrorKind::constraint_violation, os.str());
  }
}

double MomentSet::area() const {
  const double a2 = dq2 * dp2 - cpq * cpq;
  return std::sqrt(std::max(a2, 0.0));
}

MomentSet moments_from_params(const GaussianState& s, const PhysicalParams& params) {
  validate(s);
  const double hbar = params.hbar();
  MomentSet m;
  m.dq2 = hbar / s.sigma;
  m.dp2 = hbar * s.F * (1.0 + s.sigma * s.r * s.r / (4.0 * s.F));
  m.cpq = -hbar * s.r / 2.0;
  m.q = s.q;
  m.p = s.p;
  return m;
}

GaussianState params_from_moments(const MomentSet& m, const PhysicalParams& params) {
  const double hbar = params.hbar();
  if (!(m.dq2 > 0.0) || !(m.dp2 > 0.0)) {
    throw Error(ErrorKind::constraint_violation, "moments require dq2 > 0 and dp2 > 0");
  }
  const double a2 = m.dq2 * m.dp2 - m.cpq * m.cpq;
  if (!(4.0 * a2 >= hbar * hbar * (1.0 - 1e-12))) {
    std::ostringstream os;
    os.precision(17);
    os << "moment area " << std::sqrt(std::max(a2, 0.0)) << " is below hbar/2 = " << hbar / 2.0;
    throw Error(ErrorKind::subquantum_moments, os.str());
  }
  GaussianState s;
  s.sigma = hbar / m.dq2;
  s.r = -2.0 * m.cpq / hbar;
  // dp2 = hbar F + cpq^2 / dq2, i.e. F = A^2 / (hbar dq2).
  s.F = a2 / (hbar * m.dq2);
  s.q = m.q;
  s.p = m.p;
  return s;
}

PurityArea purity_and_area(const GaussianState& s, const PhysicalParams& params) {
  validate(s);
  PurityArea out;
  out.purity = std::sqrt(s.sigma / (4.0 * s.F));
  out.area = 0.5 * params.hbar() * std::sqrt(4.0 * s.F / s.sigma);
  return out;
}

cplx eval_density(const GaussianState& st, const PhysicalParams& params, double u, double s) {
  const double hbar = params.hbar();
  const double du = u - st.q;
  const double re = -st.sigma * du * du / (2.0 * hbar) - st.F * s * s / (2.0 * hbar);
  const double im = (-st.r * st.sigma * du * s / 2.0 + st.p * s) / hbar;
  return std::sqrt(st.sigma / (2.0 * pi * hbar)) * std::exp(cplx(re, im));
}

PotentialModel::PotentialModel(PotentialFamily family, std::vector<double> coeffs)
    : family_(family), coeffs_(std::move(coeffs)) {}

PotentialModel PotentialModel::free_particle() { return PotentialModel(PotentialFamily::free, {}); }

PotentialModel PotentialModel::linear(double slope) {
  return PotentialModel(PotentialFamily::linear, {0.0, slope});
}

PotentialModel PotentialModel::harmonic(double m_omega2) {
  if (!(m_omega2 > 0.0)) {
    throw Error(ErrorKind::constraint_violation, "harmonic potential needs M omega^2 > 0");
  }
  return PotentialModel(PotentialFamily::harmonic, {0.0, 0.0, 0.5 * m_omega2});
}

PotentialModel PotentialModel::quartic(double m_omega2, double eta4) {
  if (!(m_omega2 >= 0.0) || !(eta4 > 0.0)) {
    throw Error(ErrorKind::constraint_violation, "quartic potential needs M omega^2 >= 0 and eta4 > 0");
  }
  return PotentialModel(PotentialFamily::quartic, {0.0, 0.0, 0.5 * m_omega2, 0.0, eta4});
}

PotentialModel PotentialModel::polynomial(std::vector<double> c) {
  while (!c.empty() && c.back() == 0.0) c.pop_back();
  const int degree = static_cast<int>(c.size()) - 1;
  if (degree > max_degree) {
    throw Error(ErrorKind::constraint_violation, "polynomial potential degree exceeds 8");
  }
  if (degree >= 2 && (degree % 2 != 0 || c.back() <= 0.0)) {
    throw Error(ErrorKind::constraint_violation,
                "polynomial potential must be bounded below (even degree, positive leading term)");
  }
  return PotentialModel(PotentialFamily::polynomial, std::move(c));
}

PotentialValue PotentialModel::eval(double x) const {
  PotentialValue out;
  // Horner for the value and both derivatives at once.
  for (auto k = coeffs_.size(); k-- > 0;) {
    out.d2v = out.d2v * x + 2.0 * out.dv;
    out.dv = out.dv * x + out.v;
    out.v = out.v * x + coeffs_[k];
  }
  return out;
}

bool PotentialModel::is_quadratic() const { return coeffs_.size() <= 3; }

std::string PotentialModel::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (family_) {
    case PotentialFamily::free: os << "free"; break;
    case PotentialFamily::linear: os << "linear(slope=" << coeffs_[1] << ")"; break;
    case PotentialFamily::harmonic: os << "harmonic(m_omega2=" << 2.0 * coeffs_[2] << ")"; break;
    case PotentialFamily::quartic:
      os << "quartic(m_omega2=" << 2.0 * coeffs_[2] << ", eta4=" << coeffs_[4] << ")";
      break;
    case PotentialFamily::polynomial: {
      os << "polynomial(";
      for (std::size_t k = 0; k < coeffs_.size(); ++k) os << (k ? "," : "") << coeffs_[k];
      os << ")";
      break;
    }
  }
  return os.str();
}

}  // namespace qbm
