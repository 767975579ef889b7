#include <algorithm>
#include <cmath>
#include <limits>
#include <new>
#include <sstream>

#include "io.hpp"
#include "qbm/experiments.hpp"
#include "qbm/gaussian_dynamics.hpp"
#include "qbm/grid/lattice.hpp"
#include "qbm/grid/observables.hpp"
#include "qbm/histories.hpp"

namespace qbm::experiments {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr long max_steps = 10'000'000;
constexpr double trace_tolerance = 1e-6;
constexpr double support_tolerance = 1e-6;

// Thrown by a scenario once the breakdown time is known.
struct Breakdown {
  Error error;
  double t;
};

struct Ctx {
  const ExperimentConfig& cfg;
  fs::path dir;
  Provenance prov;
  std::vector<fs::path> files;

  fs::path file(const std::string& name) {
    files.push_back(dir / name);
    return files.back();
  }
  void json_out(const std::string& name, const json& doc) { write_json(file(name), doc, prov); }
  void snapshot(const std::string& stem, const GridOperator& k, double t, const PhysicalParams& p) {
    const auto written =
        write_snapshot(dir / (stem + ".bin"), k, {t, p.hbar(), p.mass(), p.gamma(), p.kT(), p.eta()}, prov);
    files.insert(files.end(), written.begin(), written.end());
  }
  void gnuplot(const std::string& name, const std::string& csv, const std::string& x,
               const std::vector<std::string>& ys, const std::vector<std::string>& columns, bool logscale = false) {
    if (!cfg.gnuplot) return;
    write_gnuplot(file(name), csv, x, ys, columns, logscale, prov);
  }
};

struct Steps {
  long n = 0;
  double dt = 0.0;
};

Steps steps_for(double span, double dt) {
  if (span <= 0.0) return {0, dt};
  const double raw = std::round(span / dt);
  if (raw > static_cast<double>(max_steps)) {
    std::ostringstream os;
    os << "time.dt: " << raw << " steps requested, limit is " << max_steps;
    throw Error(ErrorKind::cost_guard, os.str());
  }
  const long n = std::max(1L, static_cast<long>(raw));
  return {n, span / static_cast<double>(n)};
}

PropagatorConfig propagator_config(const ExperimentConfig& cfg, double dt) {
  PropagatorConfig pc;
  pc.dt = dt;
  pc.scheme = cfg.time.scheme;
  pc.include_eta = cfg.params.eta() > 0.0;
  return pc;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  if (x.size() < 2 || den == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / den;
}

void check_grid(const GridOperator& k, const Propagator& prop, double t) {
  const cplx tr = k.trace();
  if (!std::isfinite(tr.real()) || !std::isfinite(tr.imag()) || !std::isfinite(k.max_abs())) {
    throw Breakdown{Error(ErrorKind::breakdown, "grid kernel became non-finite"), t};
  }
  if (std::abs(tr - cplx(1.0)) > trace_tolerance) {
    std::ostringstream os;
    os << "grid trace drifted to " << fmt(tr.real()) << (tr.imag() < 0 ? "" : "+") << fmt(tr.imag()) << "i";
    throw Breakdown{Error(ErrorKind::breakdown, os.str()), t};
  }
  if (prop.support_loss() > support_tolerance) {
    std::ostringstream os;
    os << "kernel support left the grid: discarded norm fraction " << fmt(prop.support_loss());
    throw Breakdown{Error(ErrorKind::aliasing, os.str()), t};
  }
}

json moments_json(const MomentSet& m) {
  return {{"q", m.q}, {"p", m.p}, {"dq2", m.dq2}, {"dp2", m.dp2}, {"cpq", m.cpq}, {"A", m.area()}};
}

// gaussian_vs_grid and equilibrium
void run_trajectory(Ctx& ctx) {
  const auto& cfg = ctx.cfg;
  const auto& params = cfg.params;
  const auto st = steps_for(cfg.time.t_final, cfg.time.dt);
  const auto traj = integrate(cfg.initial, cfg.potential, params, cfg.time.t_final, st.dt, Direction::forward,
                              cfg.time.sample_every);

  GridOperator k = init_from_gaussian(cfg.initial, params, cfg.grid);
  Propagator prop(cfg.grid, cfg.potential, params, propagator_config(cfg, st.dt));

  const std::vector<std::string> cols{"t",   "q",   "p",   "Sigma", "F",      "r",
                                      "dq2", "dp2", "cpq", "A",     "purity", "hs_gap"};
  const std::vector<std::string> gcols{"t", "trace", "q", "p", "dq2", "dp2", "cpq", "purity"};
  CsvWriter out(ctx.file("traj.csv"), ctx.prov, cols);
  CsvWriter gout(ctx.file("grid_moments.csv"), ctx.prov, gcols);

  long done = 0;
  double worst = 0.0;
  GridObservables last;
  for (const auto& smp : traj.samples) {
    const long target = std::lround(smp.t / st.dt);
    if (target > done) {
      prop.evolve(k, static_cast<int>(target - done));
      done = target;
    }
    check_grid(k, prop, smp.t);
    const double gap = hs_distance_to_gaussian(k, smp.state, params);
    if (!std::isfinite(gap)) throw Breakdown{Error(ErrorKind::breakdown, "hs_gap is not finite"), smp.t};
    worst = std::max(worst, gap);
    const auto& s = smp.state;
    const auto& m = smp.moments;
    out.row({smp.t, s.q, s.p, s.sigma, s.F, s.r, m.dq2, m.dp2, m.cpq, smp.area, smp.purity, gap});
    last = observables(k, params);
    gout.row({smp.t, last.trace, last.q, last.p, last.dq2, last.dp2, last.cpq, last.purity});
  }

  const auto& fin = traj.back();
  json summary{{"t_final", fin.t},
               {"dt", st.dt},
               {"steps", st.n},
               {"max_hs_gap", worst},
               {"ode_final", moments_json(fin.moments)},
               {"grid_final", moments_json(last.moments())},
               {"grid_trace_final", last.trace},
               {"support_loss", prop.support_loss()},
               {"ode_error_estimate", traj.error_estimate}};
  if (cfg.scenario == "equilibrium") {
    const double mw2 = cfg.potential.coefficients()[2] * 2.0;
    const double dq2_eq = params.kT() / mw2;
    const double dp2_eq = params.mass() * params.kT();
    summary["dq2_target"] = dq2_eq;
    summary["dp2_target"] = dp2_eq;
    summary["ode_dq2_rel_error"] = std::abs(fin.moments.dq2 / dq2_eq - 1.0);
    summary["ode_dp2_rel_error"] = std::abs(fin.moments.dp2 / dp2_eq - 1.0);
    summary["grid_dq2_rel_error"] = std::abs(last.dq2 / dq2_eq - 1.0);
    summary["grid_dp2_rel_error"] = std::abs(last.dp2 / dp2_eq - 1.0);
    summary["relaxation_times"] = fin.t * params.gamma();
  }
  ctx.json_out("summary.json", summary);
  if (cfg.snapshots) ctx.snapshot("rho_final", k, fin.t, params);
  if (cfg.scenario == "equilibrium") {
    ctx.gnuplot("traj.gp", "traj.csv", "t", {"dq2", "dp2"}, cols);
  } else {
    ctx.gnuplot("traj.gp", "traj.csv", "t", {"hs_gap"}, cols);
  }
}

void run_hbar_sweep(Ctx& ctx) {
  const auto& cfg = ctx.cfg;
  const double t_fixed = cfg.time.t_final;
  const std::vector<std::string> cols{"hbar", "t_fixed", "hs_gap"};
  CsvWriter out(ctx.file("sweep.csv"), ctx.prov, cols);
  std::vector<double> lx, ly, gaps;
  const auto st = steps_for(t_fixed, cfg.time.dt);
  for (double hbar : cfg.options.hbars) {
    const auto params = cfg.params.with_hbar(hbar);
    GridOperator k = init_from_gaussian(cfg.initial, params, cfg.grid);
    Propagator prop(cfg.grid, cfg.potential, params, propagator_config(cfg, st.dt));
    prop.evolve(k, static_cast<int>(st.n));
    check_grid(k, prop, t_fixed);
    const auto ode = integrate(cfg.initial, cfg.potential, params, t_fixed, cfg.options.ode_dt, Direction::forward,
                               std::numeric_limits<int>::max());
    const double gap = hs_distance_to_gaussian(k, ode.back().state, params);
    if (!std::isfinite(gap)) throw Breakdown{Error(ErrorKind::breakdown, "hs_gap is not finite"), t_fixed};
    out.row({hbar, t_fixed, gap});
    gaps.push_back(gap);
    lx.push_back(std::log(hbar));
    ly.push_back(std::log(gap));
    if (cfg.snapshots) {
      std::ostringstream stem;
      stem << "rho_hbar" << gaps.size() - 1;
      ctx.snapshot(stem.str(), k, t_fixed, params);
    }
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < gaps.size(); ++i) decreasing = decreasing && gaps[i] < gaps[i - 1];
  ctx.json_out("summary.json", {{"t_fixed", t_fixed},
                                {"hbar", cfg.options.hbars},
                                {"hs_gap", gaps},
                                {"strictly_decreasing", decreasing},
                                {"fitted_exponent", fit_slope(lx, ly)}});
  ctx.gnuplot("sweep.gp", "sweep.csv", "hbar", {"hs_gap"}, cols, true);
}

Smearing smearing_for(const SmearingChoice& c, const PhaseSpaceCell& cell) {
  return c.max_resolution ? max_resolution_smearing(cell) : c.explicit_value;
}

void run_projector_quality(Ctx& ctx) {
  const auto& cfg = ctx.cfg;
  const auto& params = cfg.params;
  std::vector<std::string> cols{"cell",        "volume",        "trace",        "trace_expected",
                                "idempotency", "defect_ratio",  "epsilon_hbar", "margin_l",
                                "margin_epsilon", "regular"};
  const bool alt = cfg.options.alt_smearing.has_value();
  if (alt) {
    for (const char* c : {"distance", "distance_ratio", "epsilon_alt"}) cols.push_back(c);
  }
  CsvWriter out(ctx.file("projectors.csv"), ctx.prov, cols);
  BuildOptions bo;
  bo.enforce_regularity = false;
  for (std::size_t i = 0; i < cfg.cells.size(); ++i) {
    const auto& cell = cfg.cells[i];
    const auto p = build_projector(cell, smearing_for(cfg.smearing, cell), params, cfg.grid, bo);
    const double tr = projector_trace(p);
    const double idem = idempotency_defect(p);
    const double lp = cell.length_scale() * cell.momentum_scale();
    std::vector<double> row{static_cast<double>(i),
                            cell.volume(),
                            tr,
                            cell.volume() / (2.0 * pi * params.hbar()),
                            idem,
                            idem / tr,
                            std::sqrt(params.hbar() / lp),
                            p.margin.l,
                            p.margin.epsilon,
                            p.margin.regular ? 1.0 : 0.0};
    if (alt) {
      const auto s2 = smearing_for(*cfg.options.alt_smearing, cell);
      const auto p2 = build_projector(cell, s2, params, cfg.grid, bo);
      const double d = projector_distance(p, p2);
      row.push_back(d);
      row.push_back(d / tr);
      row.push_back(std::sqrt(s2.area(params.hbar()) / lp));
    }
    out.row(row);
    if (cfg.snapshots) ctx.snapshot("projector" + std::to_string(i), p.kernel, 0.0, params);
  }
  ctx.json_out("summary.json", {{"cells", cfg.cells.size()}, {"alt_smearing", alt}});
  ctx.gnuplot("projectors.gp", "projectors.csv", "volume", {"defect_ratio", "epsilon_hbar"}, cols, true);
}

void run_projector_transport(Ctx& ctx) {
  const auto& cfg = ctx.cfg;
  const auto& params = cfg.params;
  const auto& cell = cfg.cells.front();
  const auto p = build_projector(cell, smearing_for(cfg.smearing, cell), params, cfg.grid);
  const std::vector<std::string> cols{"t",         "hs_gap",        "bound_ref",          "epsilon_prime",
                                      "area",      "trace_initial", "support_loss",       "forward_area_ratio",
                                      "min_decoy_gap"};
  CsvWriter out(ctx.file("transport.csv"), ctx.prov, cols);
  std::optional<CsvWriter> dout;
  if (cfg.options.decoys) dout.emplace(ctx.file("decoys.csv"), ctx.prov, std::vector<std::string>{"t", "label", "hs_gap"});
  json rows = json::array();
  for (double t : cfg.options.times) {
    const auto st = steps_for(t, cfg.time.dt);
    const auto cmp =
        evolved_projector_comparison(p, cfg.potential, params, t, propagator_config(cfg, st.dt), cfg.options.decoys);
    double min_decoy = std::numeric_limits<double>::quiet_NaN();
    for (const auto& d : cmp.decoys) {
      min_decoy = std::isnan(min_decoy) ? d.hs_gap : std::min(min_decoy, d.hs_gap);
      dout->row_text({fmt(t), d.label, fmt(d.hs_gap)});
    }
    const double ratio = t > 0.0 ? transport_cell(cell, cfg.potential, params, t).area_ratio : 1.0;
    out.row({t, cmp.hs_gap, cmp.bound_ref, cmp.epsilon_prime, cmp.area, cmp.trace_initial, cmp.support_loss, ratio,
             min_decoy});
    rows.push_back({{"t", t},
                    {"gap_over_bound", cmp.bound_ref > 0.0 ? cmp.hs_gap / cmp.bound_ref : 0.0},
                    {"closer_than_decoys", cmp.decoys.empty() || cmp.hs_gap < min_decoy}});
  }
  ctx.json_out("summary.json", {{"cell_volume", cell.volume()},
                                {"margin_epsilon", p.margin.epsilon},
                                {"regular", p.margin.regular},
                                {"times", rows}});
  ctx.gnuplot("transport.gp", "transport.csv", "t", {"hs_gap", "bound_ref", "min_decoy_gap"}, cols);
}

std::string history_label(const std::vector<int>& h) {
  std::string s;
  for (std::size_t k = 0; k < h.size(); ++k) {
    if (k) s += '-';
    s += std::to_string(h[k]);
  }
  return s;
}

void run_histories(Ctx& ctx) {
  const auto& cfg = ctx.cfg;
  const auto& params = cfg.params;
  const auto& times = cfg.options.history_times;
  const std::size_t n = times.size();
  HistoryOptions ho;
  const double histories = std::pow(2.0, static_cast<double>(n));
  if (cfg.options.full_table && histories > static_cast<double>(ho.max_histories)) {
    std::ostringstream os;
    os << "full decoherence table needs 2^" << n << " = " << histories << " histories ("
       << histories * histories << " entries); limit is " << ho.max_histories << " histories";
    throw Error(ErrorKind::cost_guard, os.str());
  }

  std::vector<PhaseSpaceCell> cells{cfg.cells.front()};
  for (std::size_t k = 1; k < n; ++k) {
    cells.push_back(cfg.options.transport_chain
                        ? transport_cell(cells.back(), cfg.potential, params, times[k] - times[k - 1]).cell
                        : cfg.cells[k]);
  }
  const Smearing sm = smearing_for(cfg.smearing, cells.front());
  BuildOptions bo;
  bo.enforce_regularity = false;
  HistoryAlphabet alphabet;
  json regular = json::array();
  for (std::size_t k = 0; k < n; ++k) {
    const auto p = build_projector(cells[k], sm, params, cfg.grid, bo);
    alphabet.times.push_back(times[k]);
    alphabet.projectors.push_back({p.kernel, complement(p)});
    regular.push_back(p.margin.regular);
  }
  const GridOperator rho0 = init_from_gaussian(cfg.initial, params, cfg.grid);

  ho.mode = cfg.options.full_table ? TableMode::full : TableMode::diagonal;
  ho.tau_part = cfg.options.tau_part;
  PropagatorConfig pc = propagator_config(cfg, cfg.time.dt);
  const auto table = n_time_functional(alphabet, rho0, cfg.potential, params, pc, ho);

  {
    CsvWriter out(ctx.file("dtable.csv"), ctx.prov, {"alpha", "alpha_prime", "re_D", "im_D"});
    const auto nh = table.D.rows();
    for (Eigen::Index i = 0; i < nh; ++i) {
      for (Eigen::Index j = 0; j < nh; ++j) {
        if (ho.mode == TableMode::diagonal && i != j) continue;
        const cplx d = table.D(i, j);
        out.row({static_cast<double>(i), static_cast<double>(j), d.real(), d.imag()});
      }
    }
  }
  {
    CsvWriter out(ctx.file("histories.csv"), ctx.prov, {"alpha", "history", "p_raw", "p_clipped"});
    for (std::size_t h = 0; h < table.histories.size(); ++h) {
      out.row_text({std::to_string(h), history_label(table.histories[h]), fmt(table.probabilities[h]),
                    fmt(table.clipped[h])});
    }
  }

  // Epsilon per spacing from the backward-evolved smearing at each cell's centroid.
  const double lp = cells.front().length_scale() * cells.front().momentum_scale();
  double eps_max = 0.0;
  json spacing = json::array();
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const auto c = cells[k].centroid();
    const GaussianState s0{sm.sigma, sm.F, sm.r, c.q, c.p};
    const double span = times[k + 1] - times[k];
    const auto tr = integrate(s0, cfg.potential, params, span, std::min(1e-3, span / 10.0), Direction::backward,
                              std::numeric_limits<int>::max());
    const double a = purity_and_area(tr.back().state, params).area;
    const double eps = std::sqrt(a / lp);
    eps_max = std::max(eps_max, eps);
    spacing.push_back({{"spacing", span}, {"A", a}, {"epsilon", eps}});
  }

  // p(all later cells | first cell)
  double joint = 0.0, marginal = 0.0;
  for (std::size_t h = 0; h < table.histories.size(); ++h) {
    const auto& hist = table.histories[h];
    if (hist.front() != 0) continue;
    marginal += table.probabilities[h];
    if (std::all_of(hist.begin(), hist.end(), [](int a) { return a == 0; })) joint = table.probabilities[h];
  }
  if (!(marginal > 0.0)) throw Error(ErrorKind::undefined_conditional, "first cell has zero probability");
  const double cond = joint / marginal;

  json summary{{"histories", table.histories.size()},
               {"mode", cfg.options.full_table ? "full" : "diagonal"},
               {"total_probability", table.total_probability()},
               {"clipping_applied", table.clipping_applied},
               {"max_imag_diagonal", table.max_imag_diagonal},
               {"p_conditional", cond},
               {"p_conditional_clipped", std::clamp(cond, 0.0, 1.0)},
               {"epsilon", eps_max},
               {"kappa_bound", 3.0 * eps_max},
               {"p_conditional_bound", 1.0 - 2.0 * eps_max},
               {"spacings", spacing},
               {"projectors_regular", regular},
               {"markov_ratio", table.guard.ratio},
               {"markov_ok", table.guard.ok},
               {"warnings", table.warnings}};
  if (ho.mode == TableMode::full) {
    summary["kappa"] = consistency_epsilon(table);
    summary["kappa_abs"] = consistency_epsilon_abs(table);
    summary["full_sum"] = table.D.sum().real();
  }
  ctx.json_out("summary.json", summary);
}

void run_area_growth(Ctx& ctx) {
  const auto& cfg = ctx.cfg;
  const auto& params = cfg.params;
  const auto st = steps_for(cfg.time.t_final, cfg.time.dt);
  const auto traj = integrate(cfg.initial, cfg.potential, params, cfg.time.t_final, st.dt, Direction::forward,
                              cfg.time.sample_every);
  const std::vector<std::string> cols{"t", "A", "purity", "A2_excess", "A_short_time"};
  CsvWriter out(ctx.file("area.csv"), ctx.prov, cols);
  const double a0 = params.hbar() / 2.0;
  const double a0_sq = purity_and_area(cfg.initial, params).area * purity_and_area(cfg.initial, params).area;
  std::vector<double> lx, ly;
  bool nondecreasing = true;
  double prev = -1.0;
  for (const auto& s : traj.samples) {
    const double excess = s.area * s.area - a0_sq;
    out.row({s.t, s.area, s.purity, excess, short_time_area(params, s.t)});
    if (prev >= 0.0 && s.area < prev * (1.0 - 1e-12)) nondecreasing = false;
    prev = s.area;
    if (s.t > 0.0 && s.t <= cfg.options.fit_window && excess > 0.0) {
      lx.push_back(std::log(s.t));
      ly.push_back(std::log(excess));
    }
  }
  ctx.json_out("summary.json", {{"t_final", traj.back().t},
                                {"A_initial", std::sqrt(a0_sq)},
                                {"A_final", traj.back().area},
                                {"A_minimum_pure", a0},
                                {"nondecreasing", nondecreasing},
                                {"fit_window", cfg.options.fit_window},
                                {"fitted_power", fit_slope(lx, ly)}});
  ctx.gnuplot("area.gp", "area.csv", "t", {"A", "A_short_time"}, cols);
}

}  // namespace

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config:
    case ErrorKind::constraint_violation:
    case ErrorKind::geometry:
    case ErrorKind::below_quantum_scale:
    case ErrorKind::irregular_cell:
    case ErrorKind::misuse:
    case ErrorKind::degenerate_input:
    case ErrorKind::undefined_conditional:
      return 2;
    case ErrorKind::breakdown:
    case ErrorKind::subquantum_moments:
    case ErrorKind::aliasing:
    case ErrorKind::non_regular_evolution:
    case ErrorKind::insufficient_data:
      return 3;
    case ErrorKind::cost_guard:
    case ErrorKind::memory_budget:
      return 4;
    case ErrorKind::io:
      return 1;
  }
  return 1;
}

std::string describe(const std::string& scenario) {
  static const std::vector<std::pair<std::string, std::string>> text{
      {"gaussian_vs_grid",
       "Evolves the initial Gaussian with the moment ODE and the grid solver side by side.\n"
       "needs: params, potential, initial, grid {n_u, n_s, l_u, l_s}, time {t_final, dt, sample_every, scheme}\n"
       "writes: traj.csv (t,q,p,Sigma,F,r,dq2,dp2,cpq,A,purity,hs_gap), grid_moments.csv, summary.json"},
      {"equilibrium",
       "Long harmonic run with the bath on; compares final dq2, dp2 of both solvers with kT/(M w^2) and M kT.\n"
       "needs: harmonic potential, gamma > 0, kT > 0, initial, grid, time\n"
       "writes: traj.csv, grid_moments.csv, summary.json (relative errors to the equipartition values)"},
      {"hbar_sweep",
       "Grid-vs-Gaussian HS distance at t_fixed = time.t_final for each hbar in options.hbars.\n"
       "needs: params, potential, initial, grid, time, options {hbars (decreasing), ode_dt}\n"
       "writes: sweep.csv (hbar,t_fixed,hs_gap), summary.json (strictly_decreasing, fitted_exponent)"},
      {"projector_quality",
       "Builds a quasiprojector per cell and reports trace, idempotency defect and margin epsilon.\n"
       "needs: params, grid {matrix_n, matrix_l}, cells, smearing; options.alt_smearing adds Tr|P-P'|\n"
       "writes: projectors.csv, summary.json"},
      {"projector_transport",
       "Evolves a projector in the Heisenberg picture and compares it with the projector on the\n"
       "classically transported cell and with four decoy cells.\n"
       "needs: params, potential, grid, one cell, smearing, time.dt, options {times, decoys}\n"
       "writes: transport.csv, decoys.csv, summary.json"},
      {"histories_two_time",
       "Decoherence functional of the partitions {P, 1-P} at two times; one cell is carried along\n"
       "the classical flow, or two cells are given explicitly.\n"
       "needs: params, potential, initial (rho at t=0), grid {matrix_n, matrix_l}, cells, time.dt,\n"
       "       options {times: [t1, t2]}\n"
       "writes: dtable.csv (alpha,alpha_prime,re_D,im_D), histories.csv, summary.json (kappa, p_conditional)"},
      {"histories_n_time",
       "n-time version of histories_two_time; options.full_table=false computes only the diagonal.\n"
       "needs: as histories_two_time with options {times: [t1..tn], full_table}\n"
       "writes: dtable.csv, histories.csv, summary.json"},
      {"area_growth",
       "Wigner-function area A(t) along the Gaussian ODE, with the short-time law and a power fit of\n"
       "A^2 - A(0)^2 over (0, options.fit_window].\n"
       "needs: params, potential, initial, time\n"
       "writes: area.csv (t,A,purity,A2_excess,A_short_time), summary.json"},
  };
  for (const auto& [tag, body] : text) {
    if (tag == scenario) return tag + "\n" + body + "\n";
  }
  throw Error(ErrorKind::config, "scenario: unknown scenario '" + scenario + "'");
}

RunOutcome run_experiment(const ExperimentConfig& config, const fs::path& out_dir) {
  RunOutcome outcome;
  Ctx ctx{config, out_dir, {config.hash, code_version(), config.scenario}, {}};
  auto diagnose = [&](ErrorKind kind, const std::string& msg, std::optional<double> t) {
    outcome.exit_code = exit_code_for(kind);
    outcome.message = std::string(to_string(kind)) + ": " + msg;
    if (outcome.exit_code == 3 || outcome.exit_code == 4) {
      json d{{"error", to_string(kind)}, {"message", msg}, {"exit_code", outcome.exit_code}};
      if (t) d["t"] = *t;
      try {
        ctx.json_out("diagnostic.json", d);
      } catch (const Error&) {
      }
    }
  };
  try {
    fs::create_directories(out_dir);
    const auto& s = config.scenario;
    if (s == "gaussian_vs_grid" || s == "equilibrium") {
      run_trajectory(ctx);
    } else if (s == "hbar_sweep") {
      run_hbar_sweep(ctx);
    } else if (s == "projector_quality") {
      run_projector_quality(ctx);
    } else if (s == "projector_transport") {
      run_projector_transport(ctx);
    } else if (s == "histories_two_time" || s == "histories_n_time") {
      run_histories(ctx);
    } else if (s == "area_growth") {
      run_area_growth(ctx);
    } else {
      throw Error(ErrorKind::config, "scenario: unknown scenario '" + s + "'");
    }
  } catch (const Breakdown& b) {
    diagnose(b.error.kind(), b.error.what(), b.t);
  } catch (const BreakdownError& e) {
    diagnose(e.kind(), e.what(), e.time());
  } catch (const Error& e) {
    diagnose(e.kind(), e.what(), std::nullopt);
  } catch (const std::bad_alloc&) {
    diagnose(ErrorKind::memory_budget, "allocation failed", std::nullopt);
  } catch (const fs::filesystem_error& e) {
    diagnose(ErrorKind::io, e.what(), std::nullopt);
  }
  outcome.files = ctx.files;
  return outcome;
}

}  // namespace qbm::experiments
