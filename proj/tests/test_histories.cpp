#include <doctest.h>

#include <cmath>

#include "qbm/grid/lattice.hpp"
#include "qbm/grid/observables.hpp"
#include "qbm/histories.hpp"
#include "qbm/quasiprojector.hpp"

using namespace qbm;

namespace {

const PhysicalParams bath(1.0, 0.1, 1.0, 1.0);
const auto harmonic = PotentialModel::harmonic(1.0);

struct Setup {
  GridSpec spec = GridSpec::for_matrix(64, 10.0);
  PhaseSpaceCell g1 = PhaseSpaceCell::rectangle(-3.0, 3.0, -3.0, 3.0);
  PhaseSpaceCell g2 = g1;
  GridOperator p1, p2, rho;
  PropagatorConfig cfg;
  double t1 = 0.2, t2 = 2.2;

  Setup() : p1(spec), p2(spec), rho(spec) {
    cfg.dt = 0.05;
    g2 = transport_cell(g1, harmonic, bath, t2 - t1).cell;
    BuildOptions o;
    o.enforce_regularity = false;
    p1 = build_projector(g1, max_resolution_smearing(g1), bath, spec, o).kernel;
    p2 = build_projector(g2, max_resolution_smearing(g1), bath, spec, o).kernel;
    rho = init_from_gaussian(GaussianState{1.0 / 2.25, 2.25, 0.0, 0.5, 0.0}, bath, spec);
  }

  GridOperator box() const { return identity_operator(spec); }
  GridOperator not_(const GridOperator& p) const {
    GridOperator c = box() - p;
    c.set_hermitian_hint(true);
    return c;
  }
};

const Setup& setup() {
  static const Setup s;
  return s;
}

GridOperator evolved(const GridOperator& k, double t, const PropagatorConfig& cfg) {
  GridOperator out = k;
  PropagatorConfig c = cfg;
  const int steps = static_cast<int>(std::lround(t / c.dt));
  c.dt = t / steps;
  Propagator prop(k.spec(), harmonic, bath, c);
  prop.evolve(out, steps);
  return out;
}

}  // namespace

TEST_CASE("markov guard") {
  const auto a = markov_guard(PhysicalParams(1.0, 0.1, 10.0, 1.0), 1.0);
  CHECK(a.ratio == doctest::Approx(10.0));
  CHECK(a.ok);
  const auto b = markov_guard(PhysicalParams(1.0, 0.1, 2.0, 1.0), 0.5);
  CHECK(b.ratio == doctest::Approx(1.0));
  CHECK_FALSE(b.ok);
  const auto c = markov_guard(PhysicalParams(1.0, 0.1, 0.0, 1.0), 1.0);
  CHECK_FALSE(c.applicable);
  CHECK_THROWS_AS(markov_guard(bath, 0.0), Error);
}

TEST_CASE("identity at the first time collapses to single-time probabilities") {
  const auto& s = setup();
  const auto table = decoherence_functional_two_time({s.box()}, {s.p2, s.not_(s.p2)}, s.rho, harmonic, bath, s.t1,
                                                     s.t2, s.cfg);
  const auto rho_t2 = evolved(s.rho, s.t2, s.cfg);
  CHECK(table.histories.size() == 2);
  const double direct = trace_product(s.p2, rho_t2).real();
  CHECK(table.probabilities[table.index_of({0, 0})] == doctest::Approx(direct).epsilon(1e-6));
  CHECK(consistency_epsilon(table) == 0.0);
}

TEST_CASE("complete partitions: probabilities sum to one and the table is Hermitian") {
  const auto& s = setup();
  HistoryOptions opts;
  opts.use_adjoint_symmetry = false;
  const auto table = decoherence_functional_two_time({s.p1, s.not_(s.p1)}, {s.p2, s.not_(s.p2)}, s.rho, harmonic,
                                                     bath, s.t1, s.t2, s.cfg, opts);
  // Off-diagonal terms carry the rest of the full sum rule.
  const double off = table.D.sum().real() - table.total_probability();
  CHECK(std::abs(off) <= 12.0 * consistency_epsilon(table) * table.total_probability());
  CHECK((table.D - table.D.adjoint()).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(table.max_imag_diagonal < 1e-6);
  for (double p : table.probabilities) CHECK(p > -1e-4);
  CHECK(table.D.sum().real() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(table.guard.ok);
  CHECK(table.warnings.empty());

  const auto sym = decoherence_functional_two_time({s.p1, s.not_(s.p1)}, {s.p2, s.not_(s.p2)}, s.rho, harmonic,
                                                   bath, s.t1, s.t2, s.cfg);
  CHECK((sym.D - table.D).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("n = 2 alphabet reproduces the two-time functional exactly") {
  const auto& s = setup();
  const auto a = decoherence_functional_two_time({s.p1, s.not_(s.p1)}, {s.p2, s.not_(s.p2)}, s.rho, harmonic, bath,
                                                 s.t1, s.t2, s.cfg);
  const HistoryAlphabet alphabet{{s.t1, s.t2}, {{s.p1, s.not_(s.p1)}, {s.p2, s.not_(s.p2)}}};
  const auto b = n_time_functional(alphabet, s.rho, harmonic, bath, s.cfg);
  CHECK((a.D - b.D).cwiseAbs().maxCoeff() == 0.0);

  HistoryOptions diag;
  diag.mode = TableMode::diagonal;
  const auto c = n_time_functional(alphabet, s.rho, harmonic, bath, s.cfg, diag);
  for (std::size_t h = 0; h < c.probabilities.size(); ++h) {
    CHECK(c.probabilities[h] == doctest::Approx(b.probabilities[h]).epsilon(1e-12));
  }
  CHECK_THROWS_AS(consistency_epsilon(c), Error);
}

TEST_CASE("merging alphabet members adds the corresponding blocks") {
  const auto& s = setup();
  BuildOptions o;
  o.enforce_regularity = false;
  const auto sm = max_resolution_smearing(s.g1);
  const auto left = build_projector(PhaseSpaceCell::rectangle(-3.0, 0.0, -3.0, 3.0), sm, bath, s.spec, o).kernel;
  const auto right = build_projector(PhaseSpaceCell::rectangle(0.0, 3.0, -3.0, 3.0), sm, bath, s.spec, o).kernel;
  const GridOperator both = left + right;
  const GridOperator rest = s.not_(both);
  const std::vector<GridOperator> final_list{s.p2, s.not_(s.p2)};
  const auto fine =
      decoherence_functional_two_time({left, right, rest}, final_list, s.rho, harmonic, bath, s.t1, s.t2, s.cfg);
  const auto coarse =
      decoherence_functional_two_time({both, rest}, final_list, s.rho, harmonic, bath, s.t1, s.t2, s.cfg);
  for (int b = 0; b < 2; ++b) {
    const cplx merged = coarse.D(coarse.index_of({0, b}), coarse.index_of({0, b}));
    cplx block = 0.0;
    for (int a : {0, 1}) {
      for (int a2 : {0, 1}) block += fine.D(fine.index_of({a, b}), fine.index_of({a2, b}));
    }
    CHECK(std::abs(merged - block) < 1e-8);
  }
}

TEST_CASE("classical-flow histories decohere better than misaligned ones") {
  const auto& s = setup();
  const auto flow = decoherence_functional_two_time({s.p1, s.not_(s.p1)}, {s.p2, s.not_(s.p2)}, s.rho, harmonic,
                                                    bath, s.t1, s.t2, s.cfg);
  BuildOptions o;
  o.enforce_regularity = false;
  // Same shape and smearing as the transported cell, displaced by 2 in q.
  std::vector<PhasePoint> moved;
  for (const auto& v : s.g2.vertices()) moved.push_back({v.q + 2.0, v.p});
  const auto decoy =
      build_projector(PhaseSpaceCell::polygon(moved), max_resolution_smearing(s.g1), bath, s.spec, o).kernel;
  const auto bad = decoherence_functional_two_time({s.p1, s.not_(s.p1)}, {decoy, s.not_(decoy)}, s.rho, harmonic,
                                                   bath, s.t1, s.t2, s.cfg);
  CHECK(consistency_epsilon(flow) < consistency_epsilon(bad));
  CHECK(consistency_epsilon_abs(flow) >= consistency_epsilon(flow));
  const auto good = conditional_probability(flow, 0, 0);
  // 1 - 2 (A/LP)^{1/2} with A ~ 1.2 for this spacing and LP = 36.
  CHECK(good.raw > 1.0 - 2.0 * std::sqrt(1.2 / 36.0));
  CHECK(conditional_probability(bad, 0, 0).raw < good.raw);
}

TEST_CASE("certain and impossible final events") {
  const auto& s = setup();
  const auto certain =
      decoherence_functional_two_time({s.p1, s.not_(s.p1)}, {s.box()}, s.rho, harmonic, bath, s.t1, s.t2, s.cfg);
  CHECK(conditional_probability(certain, 0, 0).raw == doctest::Approx(1.0).epsilon(1e-6));

  BuildOptions o;
  o.enforce_regularity = false;
  // Far from where the flow carries the first cell.
  const auto away = build_projector(PhaseSpaceCell::rectangle(4.0, 5.0, 4.0, 5.0), max_resolution_smearing(s.g1),
                                    bath, s.spec, o)
                        .kernel;
  const auto none = decoherence_functional_two_time({s.p1, s.not_(s.p1)}, {away, s.not_(away)}, s.rho, harmonic,
                                                    bath, s.t1, s.t2, s.cfg);
  CHECK(conditional_probability(none, 0, 0).raw < 0.05);
}

TEST_CASE("history argument errors") {
  const auto& s = setup();
  CHECK_THROWS_AS(decoherence_functional_two_time({s.p1}, {s.p2}, s.rho, harmonic, bath, 1.0, 0.5, s.cfg), Error);
  try {
    decoherence_functional_two_time({s.p1}, {s.p2, s.not_(s.p2)}, s.rho, harmonic, bath, 0.0, 1.0, s.cfg);
    FAIL("expected constraint_violation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::constraint_violation);
  }
  HistoryAlphabet big;
  for (int k = 0; k < 14; ++k) {
    big.times.push_back(0.1 * (k + 1));
    big.projectors.push_back({s.p1, s.not_(s.p1)});
  }
  try {
    n_time_functional(big, s.rho, harmonic, bath, s.cfg);
    FAIL("expected cost_guard");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::cost_guard);
  }
  const GridSpec other = GridSpec::for_matrix(32, 10.0);
  CHECK_THROWS_AS(decoherence_functional_two_time({identity_operator(other)}, {identity_operator(other)}, s.rho,
                                                  harmonic, bath, 0.0, 1.0, s.cfg),
                  Error);

  DecoherenceTable zero;
  zero.histories = {{0, 0}, {0, 1}};
  zero.D = Eigen::MatrixXcd::Zero(2, 2);
  zero.probabilities = {0.0, 0.0};
  try {
    consistency_epsilon(zero);
    FAIL("expected degenerate_input");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::degenerate_input);
  }
  try {
    conditional_probability(zero, 0, 1);
    FAIL("expected undefined_conditional");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::undefined_conditional);
  }

  DecoherenceTable exact = zero;
  exact.D(0, 0) = 0.25;
  exact.D(1, 1) = 0.75;
  exact.probabilities = {0.25, 0.75};
  CHECK(consistency_epsilon(exact) == 0.0);
  CHECK(conditional_probability(exact, 0, 1).raw == doctest::Approx(0.75));
}

TEST_CASE("short spacing attaches a Markov warning") {
  const auto& s = setup();
  const auto table =
      decoherence_functional_two_time({s.box()}, {s.p2, s.not_(s.p2)}, s.rho, harmonic, bath, 0.0, 0.5, s.cfg);
  CHECK_FALSE(table.guard.ok);
  CHECK(table.warnings.size() == 1);
}
