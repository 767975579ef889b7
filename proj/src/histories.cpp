#include "qbm/histories.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "qbm/grid/lattice.hpp"

namespace qbm {

namespace {

struct Branch {
  std::vector<int> left, right;
  GridOperator x;
};

void evolve_to(GridOperator& x, const PotentialModel& pot, const PhysicalParams& params,
               const PropagatorConfig& cfg, double span) {
  if (span <= 0.0) return;
  const int steps = std::max(1, static_cast<int>(std::lround(span / cfg.dt)));
  PropagatorConfig run = cfg;
  run.direction = Picture::schrodinger_L;
  run.dt = span / steps;
  Propagator prop(x.spec(), pot, params, run);
  prop.evolve(x, steps);
}

GridOperator sandwich(const GridOperator& a, const GridOperator& x, const GridOperator& b) {
  return compose(compose(a, x), b);
}

}  // namespace

MarkovGuard markov_guard(const PhysicalParams& params, double spacing) {
  if (!(spacing > 0.0)) throw Error(ErrorKind::constraint_violation, "history spacing must be positive");
  MarkovGuard g;
  if (params.kT() <= 0.0) {
    g.applicable = false;
    return g;
  }
  g.ratio = spacing / (params.hbar() / params.kT());
  g.ok = g.ratio > 1.0;
  return g;
}

void HistoryAlphabet::validate(double tau_part) const {
  if (times.empty() || times.size() != projectors.size()) {
    throw Error(ErrorKind::misuse, "history alphabet needs one projector list per time");
  }
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) throw Error(ErrorKind::misuse, "history times must increase");
  }
  if (times.front() < 0.0) throw Error(ErrorKind::misuse, "history times start at t >= 0");
  const GridSpec& spec = projectors.front().empty() ? GridSpec{} : projectors.front().front().spec();
  for (std::size_t k = 0; k < projectors.size(); ++k) {
    if (projectors[k].empty()) throw Error(ErrorKind::misuse, "empty projector list in history alphabet");
    GridOperator sum(spec);
    for (const auto& p : projectors[k]) {
      if (!(p.spec() == spec)) throw Error(ErrorKind::misuse, "history projectors live on different lattices");
      sum += p;
    }
    const auto id = identity_operator(spec);
    const double miss = hs_distance(sum, id) / hs_norm(id);
    if (miss > tau_part) {
      std::ostringstream os;
      os << "projectors at t=" << times[k] << " miss the identity by " << miss << " (tolerance " << tau_part << ")";
      throw Error(ErrorKind::constraint_violation, os.str());
    }
  }
}

std::size_t HistoryAlphabet::history_count() const {
  std::size_t n = 1;
  for (const auto& list : projectors) n *= list.size();
  return n;
}

int DecoherenceTable::index_of(const std::vector<int>& history) const {
  const auto it = std::find(histories.begin(), histories.end(), history);
  if (it == histories.end()) throw Error(ErrorKind::misuse, "history not in table");
  return static_cast<int>(it - histories.begin());
}

double DecoherenceTable::total_probability() const {
  double acc = 0.0;
  for (double p : probabilities) acc += p;
  return acc;
}

DecoherenceTable n_time_functional(const HistoryAlphabet& alphabet, const GridOperator& rho0,
                                   const PotentialModel& pot, const PhysicalParams& params,
                                   const PropagatorConfig& cfg, const HistoryOptions& opts) {
  alphabet.validate(opts.tau_part);
  const auto& spec = alphabet.projectors.front().front().spec();
  if (!(rho0.spec() == spec)) throw Error(ErrorKind::misuse, "initial state and projectors live on different lattices");
  lattice_size(spec);

  const std::size_t count = alphabet.history_count();
  if (opts.mode == TableMode::full && count > opts.max_histories) {
    std::ostringstream os;
    os << "full decoherence table needs " << count << " histories (" << count * count
       << " entries); limit is " << opts.max_histories << " histories";
    throw Error(ErrorKind::cost_guard, os.str());
  }

  DecoherenceTable table;
  table.mode = opts.mode;
  const auto& times = alphabet.times;
  double min_spacing = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < times.size(); ++k) min_spacing = std::min(min_spacing, times[k] - times[k - 1]);
  if (std::isfinite(min_spacing)) {
    table.guard = markov_guard(params, min_spacing);
    if (table.guard.applicable && !table.guard.ok) {
      std::ostringstream os;
      os << "history spacing " << min_spacing << " is within the Markov time hbar/kT (ratio " << table.guard.ratio
         << ")";
      table.warnings.push_back(os.str());
    }
  }

  std::vector<Branch> level;
  {
    GridOperator rho = rho0;
    evolve_to(rho, pot, params, cfg, times.front());
    level.push_back({{}, {}, std::move(rho)});
  }

  const std::size_t n = times.size();
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const auto& list = alphabet.projectors[k];
    const int m = static_cast<int>(list.size());
    std::vector<Branch> next;
    for (const auto& br : level) {
      const bool same = br.left == br.right;
      for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) {
          if (opts.mode == TableMode::diagonal && a != b) continue;
          // With adjoint symmetry only the upper triangle of (left, right) pairs is evolved.
          if (opts.use_adjoint_symmetry && same && b < a) continue;
          Branch nb{br.left, br.right, sandwich(list[a], br.x, list[b])};
          nb.left.push_back(a);
          nb.right.push_back(b);
          evolve_to(nb.x, pot, params, cfg, times[k + 1] - times[k]);
          next.push_back(std::move(nb));
        }
      }
    }
    level = std::move(next);
  }

  // Enumerate histories in lexicographic order.
  std::vector<std::vector<int>> hist(1);
  for (const auto& list : alphabet.projectors) {
    std::vector<std::vector<int>> grown;
    for (const auto& h : hist) {
      for (int a = 0; a < static_cast<int>(list.size()); ++a) {
        grown.push_back(h);
        grown.back().push_back(a);
      }
    }
    hist = std::move(grown);
  }
  std::map<std::vector<int>, int> index;
  for (std::size_t h = 0; h < hist.size(); ++h) index[hist[h]] = static_cast<int>(h);
  table.histories = hist;
  const int nh = static_cast<int>(hist.size());
  table.D = Eigen::MatrixXcd::Zero(nh, nh);

  const auto& last = alphabet.projectors.back();
  for (const auto& br : level) {
    for (int b = 0; b < static_cast<int>(last.size()); ++b) {
      auto l = br.left, r = br.right;
      l.push_back(b);
      r.push_back(b);
      const int i = index.at(l), j = index.at(r);
      const cplx d = trace_product(last[b], br.x);
      table.D(i, j) = d;
      if (opts.use_adjoint_symmetry && i != j) table.D(j, i) = std::conj(d);
    }
  }

  table.probabilities.resize(nh);
  table.clipped.resize(nh);
  for (int h = 0; h < nh; ++h) {
    const cplx d = table.D(h, h);
    table.probabilities[h] = d.real();
    table.clipped[h] = std::clamp(d.real(), 0.0, 1.0);
    if (table.clipped[h] != d.real()) table.clipping_applied = true;
    table.max_imag_diagonal = std::max(table.max_imag_diagonal, std::abs(d.imag()));
  }
  return table;
}

DecoherenceTable decoherence_functional_two_time(const std::vector<GridOperator>& p1,
                                                 const std::vector<GridOperator>& p2, const GridOperator& rho0,
                                                 const PotentialModel& pot, const PhysicalParams& params, double t1,
                                                 double t2, const PropagatorConfig& cfg,
                                                 const HistoryOptions& opts) {
  if (!(t2 > t1)) throw Error(ErrorKind::misuse, "two-time histories need t2 > t1");
  HistoryAlphabet alphabet{{t1, t2}, {p1, p2}};
  return n_time_functional(alphabet, rho0, pot, params, cfg, opts);
}

namespace {

double consistency_ratio(const DecoherenceTable& table, bool use_abs) {
  if (table.mode != TableMode::full) throw Error(ErrorKind::misuse, "consistency needs a full table");
  const double norm = table.total_probability();
  if (!(std::abs(norm) > 0.0)) throw Error(ErrorKind::degenerate_input, "decoherence table has zero diagonal sum");
  double worst = 0.0;
  const auto n = table.D.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double v = use_abs ? std::abs(table.D(i, j)) : std::abs(table.D(i, j).real());
      worst = std::max(worst, v);
    }
  }
  return worst / norm;
}

}  // namespace

double consistency_epsilon(const DecoherenceTable& table) { return consistency_ratio(table, false); }

double consistency_epsilon_abs(const DecoherenceTable& table) { return consistency_ratio(table, true); }

ConditionalProbability conditional_probability(const DecoherenceTable& table, int from_index, int to_index) {
  double joint = 0.0, marginal = 0.0;
  bool found = false;
  for (std::size_t h = 0; h < table.histories.size(); ++h) {
    const auto& hist = table.histories[h];
    if (hist.size() != 2) throw Error(ErrorKind::misuse, "conditional probability is defined on two-time tables");
    if (hist[0] != from_index) continue;
    marginal += table.probabilities[h];
    if (hist[1] == to_index) {
      joint = table.probabilities[h];
      found = true;
    }
  }
  if (!found) throw Error(ErrorKind::misuse, "history indices out of range");
  if (!(marginal > 0.0)) throw Error(ErrorKind::undefined_conditional, "conditioning event has zero probability");
  const double raw = joint / marginal;
  return {raw, std::clamp(raw, 0.0, 1.0)};
}

}  // namespace qbm
