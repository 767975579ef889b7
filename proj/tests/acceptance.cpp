// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "qbm/gaussian_dynamics.hpp"
#include "qbm/grid/lattice.hpp"
#include "qbm/grid/observables.hpp"
#include "qbm/grid/propagator.hpp"
#include "qbm/histories.hpp"
#include "qbm/quasiprojector.hpp"

using namespace qbm;

namespace {

const PhysicalParams bath(1.0, 0.1, 1.0, 1.0);
const auto harmonic = PotentialModel::harmonic(1.0);
const auto quartic = PotentialModel::quartic(1.0, 0.1);

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += std::log(x[i]);
    sy += std::log(y[i]);
    sxx += std::log(x[i]) * std::log(x[i]);
    sxy += std::log(x[i]) * std::log(y[i]);
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

GridOperator evolve(GridOperator k, const PotentialModel& pot, const PhysicalParams& params, double t,
                    PropagatorConfig cfg) {
  const int steps = static_cast<int>(std::lround(t / cfg.dt));
  cfg.dt = t / steps;
  Propagator prop(k.spec(), pot, params, cfg);
  prop.evolve(k, steps);
  return k;
}

const GaussianState coherent{2.0, 0.5, 0.0, 2.0, 0.0};

Verdict quadratic_exactness() {
  const auto t0 = std::chrono::steady_clock::now();
  const GridSpec spec(256, 256, 10.0, 10.0);
  const double dt = 0.01;
  auto k = init_from_gaussian(coherent, bath, spec);
  Propagator prop(spec, harmonic, bath, {dt});
  const auto traj = integrate(coherent, harmonic, bath, 10.0, 1e-3, Direction::forward, 10);
  double worst = 0.0;
  for (std::size_t n = 1; n < traj.samples.size(); ++n) {
    prop.step(k);
    worst = std::max(worst, hs_distance_to_gaussian(k, traj.samples[n].state, bath));
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-3 && secs < 300.0,
          fmt("max HS(grid, ODE) over t in [0,10] = %.3e (< 1e-3), N=256, %.1f s (< 300 s)", worst, secs)};
}

Verdict equipartition() {
  const GridSpec spec(256, 256, 10.0, 10.0);
  const double t = 20.0 / bath.gamma();
  const auto traj = integrate(coherent, harmonic, bath, t, 1e-3, Direction::forward, 1 << 30);
  const auto k = evolve(init_from_gaussian(coherent, bath, spec), harmonic, bath, t, {0.05});
  const auto g = observables(k, bath);
  const double dq2 = bath.kT(), dp2 = bath.mass() * bath.kT();
  const auto& m = traj.back().moments;
  const double worst = std::max({std::abs(m.dq2 / dq2 - 1), std::abs(m.dp2 / dp2 - 1), std::abs(g.dq2 / dq2 - 1),
                                 std::abs(g.dp2 / dp2 - 1)});
  return {worst < 0.01, fmt("t=20/gamma: ODE dq2=%.6f dp2=%.6f, grid dq2=%.6f dp2=%.6f; worst rel. error %.2e (< 1e-2)",
                            m.dq2, m.dp2, g.dq2, g.dp2, worst)};
}

Verdict hbar_scaling() {
  const auto t0 = std::chrono::steady_clock::now();
  const GridSpec spec(512, 512, 4.0, 4.0);
  const GaussianState start{2.0, 0.5, 0.0, 1.0, 0.0};
  std::vector<double> hs{0.2, 0.1, 0.05}, gaps;
  for (double h : hs) {
    const auto params = bath.with_hbar(h);
    const auto k = evolve(init_from_gaussian(start, params, spec), quartic, params, 0.5, {0.005});
    const auto traj = integrate(start, quartic, params, 0.5, 1e-4, Direction::forward, 1 << 30);
    gaps.push_back(hs_distance_to_gaussian(k, traj.back().state, params));
  }
  const double secs = seconds_since(t0);
  const bool decreasing = gaps[1] < gaps[0] && gaps[2] < gaps[1];
  return {decreasing && secs < 900.0,
          fmt("quartic t=0.5: gap(hbar=0.2,0.1,0.05) = %.3e, %.3e, %.3e strictly decreasing; fitted exponent %.3f; "
              "%.1f s (< 900 s)",
              gaps[0], gaps[1], gaps[2], slope(hs, gaps), secs)};
}

Verdict projector_calculus() {
  const auto spec = GridSpec::for_matrix(256, 22.0);
  const auto cell = PhaseSpaceCell::rectangle(-10.0, 10.0, -10.0, 10.0);
  const auto p = build_projector(cell, max_resolution_smearing(cell), bath, spec);
  const Smearing thermal{1.0, 1.0, 0.0};
  const auto p2 = build_projector(cell, thermal, bath, spec);
  const double lp = 400.0;
  const double tr = projector_trace(p);
  const double expected = cell.volume() / (2.0 * pi * bath.hbar());
  const double eps = std::sqrt(bath.hbar() / lp);
  const double eps2 = std::sqrt(thermal.area(bath.hbar()) / lp);
  const double idem = idempotency_defect(p);
  const double dist = projector_distance(p, p2);
  const bool ok = std::abs(tr / expected - 1.0) < 0.01 && idem <= 5.0 * eps * tr && dist <= 5.0 * (eps + eps2) * tr;
  return {ok, fmt("[cell]=400hbar: TrP=%.6f vs %.6f (rel %.1e < 1e-2); Tr|P-P^2|/TrP=%.4f <= 5eps=%.4f; "
                  "Tr|P-P'|/TrP=%.4f <= 5(eps+eps')=%.4f",
                  tr, expected, std::abs(tr / expected - 1.0), idem / tr, 5.0 * eps, dist / tr,
                  5.0 * (eps + eps2))};
}

Verdict duality() {
  const GridSpec spec(256, 256, 12.0, 12.0);
  const auto cell = PhaseSpaceCell::rectangle(-2.0, 3.0, -2.0, 2.0);
  BuildOptions bo;
  bo.enforce_regularity = false;
  const auto p = build_projector(cell, max_resolution_smearing(cell), bath, spec, bo).kernel;
  const auto rho = init_from_gaussian({2.0, 0.5, 0.0, 0.5, 0.3}, bath, spec);
  const auto rho_t = evolve(rho, harmonic, bath, 1.0, {0.01, Scheme::strang, Picture::schrodinger_L});
  const auto p_t = evolve(p, harmonic, bath, 1.0, {0.01, Scheme::strang, Picture::heisenberg_M});
  const cplx schr = trace_product(p, rho_t);
  const cplx heis = trace_product(p_t, rho);
  const double rel = std::abs(schr - heis) / std::abs(schr);
  return {rel < 1e-6, fmt("Tr(P e^{Lt}rho)=%.12f, Tr(e^{Mt}[P] rho)=%.12f, rel. difference %.2e (< 1e-6)",
                          schr.real(), heis.real(), rel)};
}

Verdict projector_transport() {
  const GridSpec spec(512, 512, 40.0, 12.0);
  const auto cell = PhaseSpaceCell::rectangle(-10.0, 10.0, -10.0, 10.0);
  const auto p = build_projector(cell, max_resolution_smearing(cell), bath, spec);
  const auto r = evolved_projector_comparison(p, harmonic, bath, 0.5 / bath.gamma(), {0.01});
  double min_decoy = std::numeric_limits<double>::infinity();
  std::string worst_label;
  for (const auto& d : r.decoys) {
    if (d.hs_gap < min_decoy) {
      min_decoy = d.hs_gap;
      worst_label = d.label;
    }
  }
  const bool ok = r.decoys.size() == 4 && r.hs_gap <= 5.0 * r.bound_ref && r.hs_gap < min_decoy;
  return {ok, fmt("t=0.5/gamma: HS gap %.3e <= 5 eps' TrP = %.3f (eps'=%.4f); closest of 4 decoys (%s) %.3f",
                  r.hs_gap, 5.0 * r.bound_ref, r.epsilon_prime, worst_label.c_str(), min_decoy)};
}

Verdict area_law() {
  const auto cell = PhaseSpaceCell::rectangle(-2.0, 2.0, -1.0, 1.0);
  double worst = 0.0;
  for (const auto& pot : {PotentialModel::free_particle(), harmonic, quartic}) {
    for (double t : {1.0, 5.0}) {
      const double ratio = transport_cell(cell, pot, bath, t).area_ratio;
      worst = std::max(worst, std::abs(ratio / std::exp(-2.0 * bath.gamma() * t) - 1.0));
    }
  }
  return {worst < 0.01, fmt("free/harmonic/quartic, t=1,5: max |ratio e^{2 gamma t} - 1| = %.2e (< 1e-2)", worst)};
}

struct HistoryRun {
  double kappa = 0.0;
  double conditional = 0.0;
  double total = 0.0;
  double eps = 0.0;
};

HistoryRun classical_histories(int n) {
  const auto spec = GridSpec::for_matrix(256, 20.0);
  const std::vector<double> times{0.5, 2.5, 4.5};
  const auto g1 = PhaseSpaceCell::rectangle(-10.0, 10.0, -10.0, 10.0);
  const auto sm = max_resolution_smearing(g1);
  BuildOptions bo;
  bo.enforce_regularity = false;
  HistoryAlphabet alphabet;
  HistoryRun out;
  auto cell = g1;
  for (int k = 0; k < n; ++k) {
    if (k > 0) {
      const double span = times[k] - times[k - 1];
      const auto c = cell.centroid();
      const auto back = integrate({sm.sigma, sm.F, sm.r, c.q, c.p}, harmonic, bath, span, 1e-3, Direction::backward,
                                  1 << 30);
      out.eps = std::max(out.eps, std::sqrt(purity_and_area(back.back().state, bath).area / 400.0));
      cell = transport_cell(cell, harmonic, bath, span).cell;
    }
    const auto p = build_projector(cell, sm, bath, spec, bo);
    alphabet.times.push_back(times[k]);
    alphabet.projectors.push_back({p.kernel, complement(p)});
  }
  const auto rho = init_from_gaussian({1.0 / 9.0, 9.0, 0.0, 0.0, 0.0}, bath, spec);
  const auto table = n_time_functional(alphabet, rho, harmonic, bath, {0.05});
  out.kappa = consistency_epsilon(table);
  out.total = table.total_probability();
  double marginal = 0.0;
  for (std::size_t h = 0; h < table.histories.size(); ++h) {
    if (table.histories[h].front() == 0) marginal += table.probabilities[h];
  }
  out.conditional = table.probabilities[table.index_of(std::vector<int>(n, 0))] / marginal;
  return out;
}

Verdict histories() {
  const auto two = classical_histories(2);
  const auto three = classical_histories(3);
  const bool ok = two.kappa <= 3.0 * two.eps && two.conditional >= 1.0 - 2.0 * two.eps &&
                  std::abs(two.total - 1.0) < 2e-3 && three.kappa <= 3.0 * three.eps &&
                  three.conditional >= 1.0 - 2.0 * three.eps;
  return {ok, fmt("n=2: kappa=%.2e <= %.4f, p(G2|G1)=%.5f >= %.4f, sum p=%.5f; "
                  "n=3: kappa=%.2e <= %.4f, p(G2,G3|G1)=%.5f >= %.4f",
                  two.kappa, 3.0 * two.eps, two.conditional, 1.0 - 2.0 * two.eps, two.total, three.kappa,
                  3.0 * three.eps, three.conditional, 1.0 - 2.0 * three.eps)};
}

Verdict trotter_order() {
  const GridSpec spec(256, 256, 8.0, 8.0);
  const GaussianState start{2.0, 0.5, 0.0, 1.0, 0.5};
  const auto k0 = init_from_gaussian(start, bath, spec);
  const double dt0 = 0.01, t = 1.0;
  double slopes[2];
  int i = 0;
  for (auto scheme : {Scheme::strang, Scheme::lie}) {
    const auto ref = evolve(k0, harmonic, bath, t, {dt0 / 16.0, scheme});
    std::vector<double> dts{4.0 * dt0, 2.0 * dt0, dt0}, errs;
    for (double dt : dts) errs.push_back(hs_distance(evolve(k0, harmonic, bath, t, {dt, scheme}), ref));
    slopes[i++] = slope(dts, errs);
  }
  const bool ok = std::abs(slopes[0] - 2.0) <= 0.2 && std::abs(slopes[1] - 1.0) <= 0.2;
  return {ok, fmt("harmonic+bath, dt in {4,2,1}x0.01 vs dt/16: Strang slope %.3f (2.0+-0.2), Lie slope %.3f "
                  "(1.0+-0.2)",
                  slopes[0], slopes[1])};
}

Verdict structural() {
  const GridSpec spec(128, 128, 8.0, 12.0);
  auto rho = init_from_gaussian({2.0, 0.5, 0.0, 0.5, 0.0}, bath, spec);
  Propagator prop(spec, quartic, bath, {0.01});
  double drift = 0.0;
  for (int n = 0; n < 1000; ++n) {
    const cplx before = rho.trace();
    prop.step(rho);
    drift = std::max(drift, std::abs(rho.trace() - before));
  }
  const double herm = rho.hermitian_residual();

  const GaussianState s0{2.0, 0.5, 0.0, 0.5, 0.0};
  std::vector<double> spacing, resid;
  for (int every : {40, 20, 10}) {
    const auto traj = integrate(s0, quartic, bath, 2.0, 1e-3, Direction::forward, every);
    spacing.push_back(every * 1e-3);
    resid.push_back(moment_rhs_check(traj, quartic, bath));
  }
  const double order = slope(spacing, resid);

  const auto free_traj = integrate({4.0, 1.0, 0.0, 0.0, 0.0}, PotentialModel::free_particle(), bath, 20.0, 1e-3,
                                   Direction::forward, 10);
  bool monotone = true;
  for (std::size_t n = 1; n < free_traj.samples.size(); ++n) {
    monotone = monotone && free_traj.samples[n].area >= free_traj.samples[n - 1].area;
  }

  auto worst_eigenvalue = [](const GaussianState& g, const PhysicalParams& params) {
    const auto lat = GridSpec::for_matrix(128, 8.0);
    auto k = init_from_gaussian(g, params, lat);
    Propagator p(lat, harmonic, params, {0.005, Scheme::strang, Picture::schrodinger_L, params.eta() > 0.0});
    double worst = 0.0;
    for (int n = 0; n < 40; ++n) {
      p.evolve(k, 5);
      worst = std::min(worst, min_eigenvalue(k));
    }
    return worst;
  };
  const double standard = worst_eigenvalue({2.0, 0.5, 0.0, 0.0, 0.0}, bath);
  const GaussianState squeezed{8.0, 2.0, 0.0, 0.0, 0.0};
  const double eta = bath.gamma() * bath.hbar() * bath.hbar() / (12.0 * bath.mass() * bath.kT());
  const double cl = worst_eigenvalue(squeezed, bath);
  const double dekker = worst_eigenvalue(squeezed, bath.with_eta(eta));

  const bool ok = drift < 1e-10 && herm < 1e-9 && std::abs(order - 2.0) <= 0.2 && monotone && standard > -1e-3 &&
                  dekker > cl;
  return {ok, fmt("trace drift/step %.1e (< 1e-10); hermiticity after 1e3 steps %.1e (< 1e-9); moment residual "
                  "order %.2f (2); free-particle A(t) non-decreasing: %s; min eigenvalue %.1e (> -1e-3); "
                  "squeezed start %.2e -> %.2e with eta=%.4f",
                  drift, herm, order, monotone ? "yes" : "no", standard, cl, dekker, eta)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"1 quadratic-potential exactness", quadratic_exactness},
      {"2 equipartition fixed point", equipartition},
      {"3 hbar scaling of the ansatz error", hbar_scaling},
      {"4 projector calculus", projector_calculus},
      {"5 duality of the two pictures", duality},
      {"6 classical transport of projectors", projector_transport},
      {"7 dissipative area law", area_law},
      {"8 decoherence and predictability", histories},
      {"9 splitting order", trotter_order},
      {"10 structural invariants", structural},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    if (!v.pass) ++failed;
    std::printf("[%s] %s: %s\n", v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
