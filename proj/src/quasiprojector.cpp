#include "qbm/quasiprojector.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "qbm/gaussian_dynamics.hpp"
#include "qbm/grid/lattice.hpp"
#include "qbm/grid/observables.hpp"
#include "qbm/quadrature.hpp"

namespace qbm {

namespace {

constexpr double tail_widths = 6.0;

void check_smearing(const Smearing& s) {
  if (!(s.sigma > 0.0) || !(s.F > 0.0) || s.sigma > 4.0 * s.F * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "smearing needs Sigma > 0, F > 0, Sigma <= 4F (Sigma=" << s.sigma << " F=" << s.F << ")";
    throw Error(ErrorKind::constraint_violation, os.str());
  }
}

// Metric-scaled coordinates: d = X^2 + Y^2.
struct MetricScale {
  double sq, sp;
};

MetricScale metric_scale(const Smearing& s, double hbar) {
  return {std::sqrt(s.sigma / (4.0 * hbar)),
          1.0 / std::sqrt(4.0 * hbar * s.F * (1.0 + s.sigma * s.r * s.r / (4.0 * s.F)))};
}

void check_fit(const PhaseSpaceCell& cell, const Smearing& s, double hbar, const GridSpec& spec) {
  const auto box = cell.bounding_box();
  const double wq = tail_widths * std::sqrt(hbar / s.sigma);
  const double wp = tail_widths * std::sqrt(hbar * s.F) + 0.5 * std::abs(s.r) * s.sigma * wq;
  const double p_max = hbar * spec.k_s_max();
  const double ws = tail_widths * std::sqrt(hbar / s.F);
  std::ostringstream os;
  if (box.q1 - wq < -spec.l_u || box.q2 + wq > spec.l_u - spec.du()) {
    os << "cell q-range [" << box.q1 << ", " << box.q2 << "] plus smearing does not fit |u| < " << spec.l_u;
  } else if (box.p1 - wp < -p_max || box.p2 + wp > p_max) {
    os << "cell p-range [" << box.p1 << ", " << box.p2 << "] plus smearing exceeds the momentum cutoff " << p_max;
  } else if (ws > spec.l_s) {
    os << "smearing coherence length " << ws << " exceeds L_s = " << spec.l_s;
  } else {
    return;
  }
  throw Error(ErrorKind::geometry, os.str());
}

// Momentum intervals of the polygon on the vertical line q = x.
void vertical_intervals(const std::vector<PhasePoint>& poly, double x, std::vector<double>& cuts) {
  cuts.clear();
  const auto n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % n];
    if ((a.q < x) != (b.q < x)) cuts.push_back(a.p + (x - a.q) * (b.p - a.p) / (b.q - a.q));
  }
  std::sort(cuts.begin(), cuts.end());
  if (cuts.size() % 2 != 0) cuts.clear();
}

struct QNode {
  double q, w;
  std::vector<double> cuts;
};

std::vector<QNode> q_nodes(const PhaseSpaceCell& cell, double panel, std::size_t max_nodes) {
  std::vector<double> breaks;
  for (const auto& v : cell.vertices()) breaks.push_back(v.q);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  constexpr int order = 10;
  const auto rule = gauss_legendre(order);
  std::size_t count = 0;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    count += order * static_cast<std::size_t>(std::ceil((breaks[k + 1] - breaks[k]) / panel));
  }
  if (count > max_nodes) {
    std::ostringstream os;
    os << "projector quadrature needs " << count << " q nodes (budget " << max_nodes << ")";
    throw Error(ErrorKind::memory_budget, os.str());
  }

  std::vector<QNode> nodes;
  nodes.reserve(count);
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double a = breaks[k], b = breaks[k + 1];
    const int panels = static_cast<int>(std::ceil((b - a) / panel));
    const double h = (b - a) / panels;
    for (int j = 0; j < panels; ++j) {
      const double lo = a + j * h;
      for (int g = 0; g < order; ++g) {
        QNode node{lo + 0.5 * h * (rule.nodes[g] + 1.0), 0.5 * h * rule.weights[g], {}};
        vertical_intervals(cell.vertices(), node.q, node.cuts);
        if (!node.cuts.empty()) nodes.push_back(std::move(node));
      }
    }
  }
  return nodes;
}

WeylSymbol closed_form_symbol(const Rectangle& rc, const Smearing& s, double hbar, const GridSpec& spec) {
  auto sym = make_symbol(spec, hbar);
  const double a = std::sqrt(s.sigma / (2.0 * hbar));
  const double b = 1.0 / std::sqrt(2.0 * hbar * s.F);
  std::vector<double> fq(spec.n_u), fp(spec.n_s);
  for (int i = 0; i < spec.n_u; ++i) {
    const double x = spec.u(i);
    fq[i] = 0.5 * (std::erf((x - rc.q1) * a) - std::erf((x - rc.q2) * a));
  }
  for (int m = 0; m < spec.n_s; ++m) {
    const double xi = sym.xi(m);
    fp[m] = 0.5 * (std::erf((xi - rc.p1) * b) - std::erf((xi - rc.p2) * b));
  }
  for (int i = 0; i < spec.n_u; ++i) {
    for (int m = 0; m < spec.n_s; ++m) sym(i, m) = fq[i] * fp[m];
  }
  return sym;
}

// f(x, xi) = int dq sqrt(S/2 pi hbar) e^{-S (x-q)^2/2hbar}
//            sum_intervals (erf((p_hi - mu)/w) - erf((p_lo - mu)/w)) / 2,
// mu = xi + r S (x - q)/2, w = sqrt(2 hbar F); q by Gauss-Legendre panels,
// p exactly.
WeylSymbol quadrature_symbol(const PhaseSpaceCell& cell, const Smearing& s, double hbar, const GridSpec& spec,
                             const BuildOptions& opts) {
  auto sym = make_symbol(spec, hbar);
  const double sq = std::sqrt(hbar / s.sigma);
  const auto nodes = q_nodes(cell, sq, opts.max_quadrature_nodes);
  const double reach = sq * std::sqrt(80.0);
  const double w = std::sqrt(2.0 * hbar * s.F);
  const double edge = tail_widths * w;
  const double norm = std::sqrt(s.sigma / (2.0 * pi * hbar));
  const double xi0 = sym.xi(0);
  const double dxi = sym.dxi();
  const int n_s = spec.n_s;

  auto row_job = [&](int i) {
    const double x = spec.u(i);
    std::vector<double> acc(n_s, 0.0);
    auto first = std::lower_bound(nodes.begin(), nodes.end(), x - reach,
                                  [](const QNode& n, double v) { return n.q < v; });
    for (auto it = first; it != nodes.end() && it->q <= x + reach; ++it) {
      const double d = x - it->q;
      const double g = it->w * norm * std::exp(-s.sigma * d * d / (2.0 * hbar));
      const double c = 0.5 * s.r * s.sigma * d;
      for (std::size_t k = 0; k + 1 < it->cuts.size(); k += 2) {
        // In xi: 0 outside [lo - c - edge, hi - c + edge], 1 well inside.
        const double lo = it->cuts[k] - c, hi = it->cuts[k + 1] - c;
        const int m0 = std::max(0, static_cast<int>(std::ceil((lo - edge - xi0) / dxi)));
        const int m1 = std::min(n_s - 1, static_cast<int>(std::floor((hi + edge - xi0) / dxi)));
        for (int m = m0; m <= m1; ++m) {
          const double xi = xi0 + m * dxi;
          if (xi > lo + edge && xi < hi - edge) {
            acc[m] += g;
          } else {
            acc[m] += g * 0.5 * (std::erf((hi - xi) / w) - std::erf((lo - xi) / w));
          }
        }
      }
    }
    for (int m = 0; m < n_s; ++m) sym(i, m) = acc[m];
  };

  if (opts.exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 4)
    for (int i = 0; i < spec.n_u; ++i) row_job(i);
  } else {
    for (int i = 0; i < spec.n_u; ++i) row_job(i);
  }
  return sym;
}

double segment_distance2(double px, double py, double ax, double ay, double bx, double by) {
  const double dx = bx - ax, dy = by - ay;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((px - ax) * dx + (py - ay) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double ex = ax + t * dx - px, ey = ay + t * dy - py;
  return ex * ex + ey * ey;
}

// Radius of curvature at densely sampled vertices (both neighbouring edges
// shorter than l) must exceed l; isolated corners between long edges are
// accepted.
bool curvature_check(const std::vector<PhasePoint>& v, double l) {
  const auto n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = v[(i + n - 1) % n];
    const auto& b = v[i];
    const auto& c = v[(i + 1) % n];
    const double e1 = std::hypot(b.q - a.q, b.p - a.p);
    const double e2 = std::hypot(c.q - b.q, c.p - b.p);
    if (e1 >= l || e2 >= l) continue;
    const double turn = std::abs(std::atan2((b.q - a.q) * (c.p - b.p) - (b.p - a.p) * (c.q - b.q),
                                            (b.q - a.q) * (c.q - b.q) + (b.p - a.p) * (c.p - b.p)));
    if (turn > 1e-12 && 0.5 * (e1 + e2) / turn < l) return false;
  }
  return true;
}

GridOperator hermitian_copy(GridOperator k) {
  k.set_hermitian_hint(true);
  return k;
}

PhaseSpaceCell moved_cell(const PhaseSpaceCell& cell, double dq, double angle) {
  const auto c = cell.centroid();
  const double l = cell.length_scale(), p = cell.momentum_scale();
  const double cs = std::cos(angle), sn = std::sin(angle);
  std::vector<PhasePoint> out;
  for (const auto& v : cell.vertices()) {
    const double x = (v.q - c.q) / l, y = (v.p - c.p) / p;
    out.push_back({c.q + dq + l * (cs * x - sn * y), c.p + p * (sn * x + cs * y)});
  }
  return PhaseSpaceCell::polygon(std::move(out), l, p);
}

}  // namespace

double Smearing::area(double hbar) const { return 0.5 * hbar * std::sqrt(4.0 * F / sigma); }

Smearing max_resolution_smearing(const PhaseSpaceCell& cell) {
  const double sigma = 2.0 * cell.momentum_scale() / cell.length_scale();
  return {sigma, sigma / 4.0, 0.0};
}

double metric_distance2(const Smearing& s, double hbar, double dq, double dp) {
  const auto m = metric_scale(s, hbar);
  const double x = m.sq * dq, y = m.sp * dp;
  return x * x + y * y;
}

double default_margin_length(double epsilon_target) {
  if (!(epsilon_target > 0.0) || !(epsilon_target < 1.0)) {
    throw Error(ErrorKind::constraint_violation, "margin target must lie in (0, 1)");
  }
  return std::sqrt(std::log(1.0 / epsilon_target) / 2.0);
}

MarginReport cell_margin_epsilon(const PhaseSpaceCell& cell, const Smearing& s, const PhysicalParams& params,
                                 double l) {
  check_smearing(s);
  if (!(l > 0.0)) throw Error(ErrorKind::constraint_violation, "margin length must be positive");
  const auto ms = metric_scale(s, params.hbar());
  std::vector<PhasePoint> v;
  for (const auto& z : cell.vertices()) v.push_back({ms.sq * z.q, ms.sp * z.p});

  double x0 = v[0].q, x1 = v[0].q, y0 = v[0].p, y1 = v[0].p;
  double perimeter = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    x0 = std::min(x0, v[i].q), x1 = std::max(x1, v[i].q);
    y0 = std::min(y0, v[i].p), y1 = std::max(y1, v[i].p);
    const auto& b = v[(i + 1) % v.size()];
    perimeter += std::hypot(b.q - v[i].q, b.p - v[i].p);
  }
  x0 -= l, x1 += l, y0 -= l, y1 += l;
  const double h = std::max(l / 16.0, std::sqrt((x1 - x0) * (y1 - y0) / 1.6e7));
  const int nx = static_cast<int>(std::ceil((x1 - x0) / h)) + 1;
  const int ny = static_cast<int>(std::ceil((y1 - y0) / h)) + 1;
  std::vector<char> mark(static_cast<std::size_t>(nx) * ny, 0);
  const double l2 = l * l;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const auto& a = v[k];
    const auto& b = v[(k + 1) % v.size()];
    const int i0 = std::max(0, static_cast<int>(std::floor((std::min(a.q, b.q) - l - x0) / h)));
    const int i1 = std::min(nx - 1, static_cast<int>(std::ceil((std::max(a.q, b.q) + l - x0) / h)));
    const int j0 = std::max(0, static_cast<int>(std::floor((std::min(a.p, b.p) - l - y0) / h)));
    const int j1 = std::min(ny - 1, static_cast<int>(std::ceil((std::max(a.p, b.p) + l - y0) / h)));
    for (int i = i0; i <= i1; ++i) {
      const double px = x0 + (i + 0.5) * h;
      for (int j = j0; j <= j1; ++j) {
        auto& m = mark[static_cast<std::size_t>(i) * ny + j];
        if (m) continue;
        if (segment_distance2(px, y0 + (j + 0.5) * h, a.q, a.p, b.q, b.p) < l2) m = 1;
      }
    }
  }
  const auto count = std::count(mark.begin(), mark.end(), 1);
  const double jac = 1.0 / (ms.sq * ms.sp);

  MarginReport r;
  r.l = l;
  r.margin_area = static_cast<double>(count) * h * h * jac;
  r.epsilon = r.margin_area / cell.volume();
  r.strip_estimate = 2.0 * l * perimeter * jac;
  r.curvature_ok = curvature_check(v, l);
  r.regular = r.curvature_ok && r.epsilon < 1.0 && std::exp(-2.0 * l * l) < r.epsilon;
  return r;
}

WeylSymbol projector_symbol(const PhaseSpaceCell& cell, const Smearing& s, const PhysicalParams& params,
                            const GridSpec& spec, const BuildOptions& opts) {
  check_smearing(s);
  if (cell.is_rectangle() && s.r == 0.0 && !opts.force_quadrature) {
    return closed_form_symbol(cell.rect(), s, params.hbar(), spec);
  }
  return quadrature_symbol(cell, s, params.hbar(), spec, opts);
}

Quasiprojector build_projector(const PhaseSpaceCell& cell, const Smearing& s, const PhysicalParams& params,
                               const GridSpec& spec, const BuildOptions& opts) {
  check_smearing(s);
  const double hbar = params.hbar();
  const double lp = cell.length_scale() * cell.momentum_scale();
  if (lp < hbar) {
    std::ostringstream os;
    os << "cell scales L P = " << lp << " are below hbar = " << hbar;
    throw Error(ErrorKind::below_quantum_scale, os.str());
  }
  check_fit(cell, s, hbar, spec);

  const double target = std::sqrt(s.area(hbar) / lp);
  const double l = opts.margin_l.value_or(default_margin_length(std::min(target, 0.5)));
  auto margin = cell_margin_epsilon(cell, s, params, l);
  if (opts.enforce_regularity && !(margin.epsilon < 1.0)) {
    std::ostringstream os;
    os << "cell margin covers the whole cell (epsilon = " << margin.epsilon << ")";
    throw Error(ErrorKind::irregular_cell, os.str());
  }

  const bool closed = cell.is_rectangle() && s.r == 0.0 && !opts.force_quadrature;
  auto sym = projector_symbol(cell, s, params, spec, opts);
  auto kernel = weyl_quantize(sym, params, spec);
  return {cell, s, std::move(kernel), margin, closed};
}

double projector_trace(const Quasiprojector& p) { return p.kernel.trace().real(); }

double idempotency_defect(const Quasiprojector& p) {
  const Eigen::MatrixXcd m = to_matrix(p.kernel, Sublattice::even);
  const Eigen::MatrixXcd herm = 0.5 * (m + m.adjoint());
  const Eigen::MatrixXcd d = herm - herm * herm;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(d, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

double projector_distance(const Quasiprojector& a, const Quasiprojector& b) {
  if (!a.cell.same_geometry(b.cell)) {
    throw Error(ErrorKind::misuse, "projector_distance compares projectors on the same cell");
  }
  return trace_norm(hermitian_copy(a.kernel - b.kernel));
}

double product_defect(const Quasiprojector& p1, const Quasiprojector& p2, const Quasiprojector& p12) {
  GridOperator d = compose(p1.kernel, p2.kernel) - p12.kernel;
  d.set_hermitian_hint(false);
  return trace_norm(d);
}

GridOperator complement(const Quasiprojector& p) {
  GridOperator out = identity_operator(p.kernel.spec()) - p.kernel;
  out.set_hermitian_hint(p.kernel.hermitian_hint());
  return out;
}

TransportResult transport_cell(const PhaseSpaceCell& cell, const PotentialModel& pot, const PhysicalParams& params,
                               double t, FlowDirection direction, int boundary_points) {
  if (!(t >= 0.0)) throw Error(ErrorKind::constraint_violation, "transport time must be non-negative");
  if (t == 0.0) return {cell, 1.0};
  auto pts = cell.sample_boundary(std::max(256, boundary_points));
  const double sign = direction == FlowDirection::forward ? 1.0 : -1.0;
  const double m = params.mass(), g2 = 2.0 * params.gamma();
  auto rhs = [&](PhasePoint z) {
    return PhasePoint{sign * z.p / m, -sign * (pot.eval(z.q).dv + g2 * z.p)};
  };
  const int steps = static_cast<int>(std::ceil(t / 2e-3));
  const double h = t / steps;
  for (auto& z : pts) {
    for (int n = 0; n < steps; ++n) {
      const auto k1 = rhs(z);
      const auto k2 = rhs({z.q + 0.5 * h * k1.q, z.p + 0.5 * h * k1.p});
      const auto k3 = rhs({z.q + 0.5 * h * k2.q, z.p + 0.5 * h * k2.p});
      const auto k4 = rhs({z.q + h * k3.q, z.p + h * k3.p});
      z.q += h / 6.0 * (k1.q + 2.0 * k2.q + 2.0 * k3.q + k4.q);
      z.p += h / 6.0 * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p);
    }
  }
  pts = remove_collinear(pts, 1e-9);
  if (!is_simple(pts)) {
    throw Error(ErrorKind::non_regular_evolution, "transported cell boundary self-intersects");
  }
  auto out = PhaseSpaceCell::polygon(std::move(pts), cell.length_scale(), cell.momentum_scale());
  return {out, out.volume() / cell.volume()};
}

EvolvedComparison evolved_projector_comparison(const Quasiprojector& p, const PotentialModel& pot,
                                               const PhysicalParams& params, double t, const PropagatorConfig& cfg,
                                               bool with_decoys, double support_loss_slack) {
  if (!(t >= 0.0)) throw Error(ErrorKind::constraint_violation, "comparison time must be non-negative");
  const auto& spec = p.kernel.spec();
  GridOperator evolved = p.kernel;
  double loss = 0.0;
  if (t > 0.0) {
    const int steps = std::max(1, static_cast<int>(std::lround(t / cfg.dt)));
    PropagatorConfig run = cfg;
    run.direction = Picture::heisenberg_M;
    run.dt = t / steps;
    Propagator prop(spec, pot, params, run);
    prop.evolve(evolved, steps);
    loss = prop.support_loss();
  }
  if (loss > support_loss_slack) {
    std::ostringstream os;
    os << "evolved projector lost " << loss << " of its norm at the grid edge (slack "
       << support_loss_slack << ")";
    throw Error(ErrorKind::aliasing, os.str());
  }

  EvolvedComparison out{t > 0.0 ? transport_cell(p.cell, pot, params, t, FlowDirection::backward).cell : p.cell,
                        0.0, 0.0, 0.0, 0.0, 0.0, 0.0, p.smearing, {}};
  out.support_loss = loss;
  if (t > 0.0) {
    const auto c = p.cell.centroid();
    const GaussianState start{p.smearing.sigma, p.smearing.F, p.smearing.r, c.q, c.p};
    const auto traj = integrate(start, pot, params, t, default_dt(start, pot, params), Direction::backward,
                                1 << 30);
    const auto& st = traj.back().state;
    out.reference_smearing = {st.sigma, st.F, st.r};
  }

  BuildOptions bo;
  bo.enforce_regularity = false;
  auto build = [&](const PhaseSpaceCell& cell) {
    return build_projector(cell, out.reference_smearing, params, spec, bo).kernel;
  };
  out.hs_gap = hs_distance(evolved, build(out.reference_cell));

  const double lp = p.cell.length_scale() * p.cell.momentum_scale();
  out.area = out.reference_smearing.area(params.hbar());
  out.epsilon_prime = std::sqrt(out.area / lp);
  out.trace_initial = projector_trace(p);
  out.bound_ref = out.epsilon_prime * out.trace_initial;

  if (with_decoys && t > 0.0) {
    const auto fwd = transport_cell(p.cell, pot, params, t, FlowDirection::forward).cell;
    out.decoys.push_back({"untransported", hs_distance(evolved, build(p.cell))});
    out.decoys.push_back({"forward_flow", hs_distance(evolved, build(fwd))});
    out.decoys.push_back(
        {"shifted_q", hs_distance(evolved, build(moved_cell(out.reference_cell, 0.25 * p.cell.length_scale(), 0.0)))});
    out.decoys.push_back({"rotated", hs_distance(evolved, build(moved_cell(out.reference_cell, 0.0, pi / 8.0)))});
  }
  return out;
}

double effective_growth_mu(double epsilon_before, double epsilon_after) {
  auto ok = [](double e) { return e > 0.0 && e < 1.0; };
  if (!ok(epsilon_before) || !ok(epsilon_after)) {
    throw Error(ErrorKind::constraint_violation, "growth factor needs epsilons in (0, 1)");
  }
  return (1.0 + epsilon_after) / (1.0 + epsilon_before);
}

}  // namespace qbm
