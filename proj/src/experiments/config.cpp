#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "qbm/experiments.hpp"
#include "qbm/gaussian_dynamics.hpp"

namespace qbm::experiments {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw Error(ErrorKind::config, field + ": " + what);
}

// Object view that records which keys were read so unknown ones can be
// reported.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) fail(field(key), "missing");
    return j_.at(key);
  }

  double number(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_number()) fail(field(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(field(key), "must be finite");
    return x;
  }
  double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  double positive(const std::string& key) {
    const double x = number(key);
    if (!(x > 0.0)) fail(field(key), "must be > 0");
    return x;
  }
  double positive(const std::string& key, double fallback) { return has(key) ? positive(key) : fallback; }

  double non_negative(const std::string& key, double fallback) {
    const double x = number(key, fallback);
    if (x < 0.0) fail(field(key), "must be >= 0");
    return x;
  }

  int integer(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_number_integer()) fail(field(key), "expected an integer");
    return v.get<int>();
  }
  int integer(const std::string& key, int fallback) { return has(key) ? integer(key) : fallback; }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const auto& v = raw(key);
    if (!v.is_boolean()) fail(field(key), "expected true or false");
    return v.get<bool>();
  }

  std::string text(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_string()) fail(field(key), "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_array()) fail(field(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(field(key) + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(v[i].get<double>());
      if (!std::isfinite(out.back())) fail(field(key) + "[" + std::to_string(i) + "]", "must be finite");
    }
    return out;
  }

  Node child(const std::string& key) { return Node(raw(key), field(key)); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail(field(it.key()), "unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

bool uses(const std::string& scenario, std::initializer_list<const char*> list) {
  return std::any_of(list.begin(), list.end(), [&](const char* s) { return scenario == s; });
}

PhysicalParams parse_params(Node n) {
  const double mass = n.positive("mass", 1.0);
  const double gamma = n.non_negative("gamma", 0.0);
  const double kT = n.non_negative("kT", 0.0);
  const double hbar = n.positive("hbar", 1.0);
  const double eta = n.non_negative("eta", 0.0);
  n.finish();
  return PhysicalParams(mass, gamma, kT, hbar, eta);
}

PotentialModel parse_potential(Node n) {
  const std::string family = n.text("family");
  PotentialModel pot = PotentialModel::free_particle();
  try {
    if (family == "free") {
    } else if (family == "linear") {
      pot = PotentialModel::linear(n.number("slope"));
    } else if (family == "harmonic") {
      pot = PotentialModel::harmonic(n.positive("m_omega2"));
    } else if (family == "quartic") {
      const double mw2 = n.number("m_omega2");
      pot = PotentialModel::quartic(mw2, n.positive("eta4"));
    } else if (family == "polynomial") {
      pot = PotentialModel::polynomial(n.numbers("coefficients"));
    } else {
      fail(n.field("family"), "unknown family '" + family + "' (free, linear, harmonic, quartic, polynomial)");
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::config) throw;
    fail(n.field("family"), e.what());
  }
  n.finish();
  return pot;
}

GaussianState parse_state(Node n) {
  GaussianState g;
  g.sigma = n.positive("sigma");
  g.F = n.positive("F");
  g.r = n.number("r", 0.0);
  g.q = n.number("q", 0.0);
  g.p = n.number("p", 0.0);
  n.finish();
  try {
    validate(g, breakdown_slack);
  } catch (const Error& e) {
    fail(n.field("sigma"), e.what());
  }
  return g;
}

bool is_pow2(int n) { return n >= 32 && (n & (n - 1)) == 0; }

GridSpec parse_grid(Node n) {
  GridSpec spec;
  if (n.has("matrix_n")) {
    const int nx = n.integer("matrix_n");
    if (nx < 16 || (nx & (nx - 1)) != 0) fail(n.field("matrix_n"), "must be a power of two >= 16");
    spec = GridSpec::for_matrix(nx, n.positive("matrix_l"));
  } else {
    const int nu = n.integer("n_u"), ns = n.integer("n_s");
    if (!is_pow2(nu)) fail(n.field("n_u"), "must be a power of two >= 32");
    if (!is_pow2(ns)) fail(n.field("n_s"), "must be a power of two >= 32");
    spec = GridSpec(nu, ns, n.positive("l_u"), n.positive("l_s"));
  }
  n.finish();
  return spec;
}

TimeGrid parse_time(Node n) {
  TimeGrid t;
  t.t_final = n.non_negative("t_final", 0.0);
  t.dt = n.positive("dt");
  t.sample_every = n.integer("sample_every", 10);
  if (t.sample_every < 1) fail(n.field("sample_every"), "must be >= 1");
  if (n.has("scheme")) {
    const auto s = n.text("scheme");
    if (s == "strang") {
      t.scheme = Scheme::strang;
    } else if (s == "lie") {
      t.scheme = Scheme::lie;
    } else {
      fail(n.field("scheme"), "expected 'strang' or 'lie'");
    }
  }
  n.finish();
  return t;
}

PhaseSpaceCell parse_cell(const json& j, const std::string& path) {
  Node n(j, path);
  PhaseSpaceCell cell = PhaseSpaceCell::rectangle(0.0, 1.0, 0.0, 1.0);
  try {
    if (n.has("rectangle")) {
      const auto r = n.numbers("rectangle");
      if (r.size() != 4) fail(n.field("rectangle"), "expected [q1, q2, p1, p2]");
      cell = PhaseSpaceCell::rectangle(r[0], r[1], r[2], r[3]);
    } else if (n.has("polygon")) {
      const auto& v = n.raw("polygon");
      if (!v.is_array() || v.size() < 3) fail(n.field("polygon"), "expected at least three [q, p] vertices");
      std::vector<PhasePoint> pts;
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_array() || v[i].size() != 2 || !v[i][0].is_number() || !v[i][1].is_number()) {
          fail(n.field("polygon") + "[" + std::to_string(i) + "]", "expected [q, p]");
        }
        pts.push_back({v[i][0].get<double>(), v[i][1].get<double>()});
      }
      cell = PhaseSpaceCell::polygon(pts);
    } else {
      fail(path, "expected 'rectangle' or 'polygon'");
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::config) throw;
    fail(path, e.what());
  }
  n.finish();
  return cell;
}

SmearingChoice parse_smearing(const json& j, const std::string& path) {
  SmearingChoice s;
  if (j.is_string()) {
    if (j.get<std::string>() != "max_resolution") fail(path, "expected \"max_resolution\" or an object");
    return s;
  }
  Node n(j, path);
  s.max_resolution = false;
  s.explicit_value.sigma = n.positive("sigma");
  s.explicit_value.F = n.positive("F");
  s.explicit_value.r = n.number("r", 0.0);
  n.finish();
  return s;
}

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) fail(field, what);
}

void check_increasing(const std::vector<double>& v, const std::string& field) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) fail(field, "values must increase");
  }
}

}  // namespace

std::string code_version() { return std::string("qbm ") + QBM_VERSION; }

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::io, "SHA-256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::config, std::string("<document>: ") + e.what());
  }

  ExperimentConfig cfg;
  Node root(doc, "");
  cfg.scenario = root.text("scenario");
  const auto& tags = scenario_tags();
  if (std::find(tags.begin(), tags.end(), cfg.scenario) == tags.end()) {
    fail("scenario", "unknown scenario '" + cfg.scenario + "'");
  }
  const std::string& sc = cfg.scenario;

  cfg.params = root.has("params") ? parse_params(root.child("params")) : PhysicalParams();
  if (root.has("potential")) cfg.potential = parse_potential(root.child("potential"));

  const bool grid_scenario = !uses(sc, {"area_growth"});
  const bool matrix_scenario =
      uses(sc, {"projector_quality", "histories_two_time", "histories_n_time"});
  if (grid_scenario) {
    cfg.grid = parse_grid(root.child("grid"));
    if (matrix_scenario && !(cfg.grid.n_u == cfg.grid.n_s && cfg.grid.l_s == 2.0 * cfg.grid.l_u)) {
      fail("grid", "this scenario needs the matrix form {matrix_n, matrix_l}");
    }
    if (cfg.grid.size() > (std::size_t{1} << 22)) {
      throw Error(ErrorKind::cost_guard, "grid: " + std::to_string(cfg.grid.n_u) + " x " +
                                             std::to_string(cfg.grid.n_s) + " exceeds the 2^22 point limit");
    }
    if (matrix_scenario && cfg.grid.n_u / 2 > 1024) {
      throw Error(ErrorKind::cost_guard, "grid.matrix_n: dense matrices above 1024 are refused");
    }
  } else if (root.has("grid")) {
    fail("grid", "not used by " + sc);
  }

  const bool needs_initial =
      uses(sc, {"gaussian_vs_grid", "equilibrium", "hbar_sweep", "histories_two_time", "histories_n_time",
                "area_growth"});
  if (needs_initial) {
    cfg.initial = parse_state(root.child("initial"));
  } else if (root.has("initial")) {
    fail("initial", "not used by " + sc);
  }

  const bool needs_time = sc != "projector_quality";
  if (needs_time) {
    cfg.time = parse_time(root.child("time"));
  } else if (root.has("time")) {
    fail("time", "not used by " + sc);
  }

  const bool needs_cells = uses(sc, {"projector_quality", "projector_transport", "histories_two_time",
                                     "histories_n_time"});
  if (needs_cells) {
    const auto& cells = root.raw("cells");
    if (!cells.is_array() || cells.empty()) fail("cells", "expected a non-empty array");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      cfg.cells.push_back(parse_cell(cells[i], "cells[" + std::to_string(i) + "]"));
    }
    if (root.has("smearing")) cfg.smearing = parse_smearing(root.raw("smearing"), "smearing");
  } else {
    if (root.has("cells")) fail("cells", "not used by " + sc);
    if (root.has("smearing")) fail("smearing", "not used by " + sc);
  }

  if (root.has("output")) {
    Node out = root.child("output");
    cfg.snapshots = out.boolean("snapshots", false);
    cfg.gnuplot = out.boolean("gnuplot", false);
    out.finish();
  }

  ScenarioOptions& o = cfg.options;
  json empty = json::object();
  Node opt = root.has("options") ? root.child("options") : Node(empty, "options");
  if (sc == "gaussian_vs_grid" || sc == "equilibrium") {
    require(cfg.time.t_final > 0.0, "time.t_final", "must be > 0");
    if (sc == "equilibrium") {
      require(cfg.potential.family() == PotentialFamily::harmonic, "potential.family",
              "equilibrium needs a harmonic potential");
      require(cfg.params.gamma() > 0.0 && cfg.params.kT() > 0.0, "params", "equilibrium needs gamma > 0 and kT > 0");
    }
  } else if (sc == "hbar_sweep") {
    require(cfg.time.t_final > 0.0, "time.t_final", "must be > 0");
    o.hbars = opt.numbers("hbars");
    require(o.hbars.size() >= 2, opt.field("hbars"), "need at least two values");
    for (double h : o.hbars) require(h > 0.0, opt.field("hbars"), "values must be > 0");
    for (std::size_t i = 1; i < o.hbars.size(); ++i) {
      require(o.hbars[i] < o.hbars[i - 1], opt.field("hbars"), "values must decrease");
    }
    o.ode_dt = opt.positive("ode_dt", 1e-4);
  } else if (sc == "projector_quality") {
    if (opt.has("alt_smearing")) o.alt_smearing = parse_smearing(opt.raw("alt_smearing"), opt.field("alt_smearing"));
  } else if (sc == "projector_transport") {
    require(cfg.cells.size() == 1, "cells", "projector_transport takes exactly one cell");
    o.times = opt.numbers("times");
    require(!o.times.empty() && o.times.front() >= 0.0, opt.field("times"), "need times >= 0");
    check_increasing(o.times, opt.field("times"));
    o.decoys = opt.boolean("decoys", true);
  } else if (sc == "histories_two_time" || sc == "histories_n_time") {
    o.history_times = opt.numbers("times");
    check_increasing(o.history_times, opt.field("times"));
    const std::size_t n = o.history_times.size();
    if (sc == "histories_two_time") {
      require(n == 2, opt.field("times"), "expected [t1, t2]");
    } else {
      require(n >= 2, opt.field("times"), "need at least two times");
    }
    require(o.history_times.front() >= 0.0, opt.field("times"), "times start at t >= 0");
    require(cfg.cells.size() == 1 || cfg.cells.size() == n, "cells",
            "give one cell (transported along the flow) or one per time");
    o.transport_chain = cfg.cells.size() == 1;
    o.full_table = opt.boolean("full_table", true);
    if (sc == "histories_two_time") require(o.full_table, opt.field("full_table"), "two-time tables are always full");
    o.tau_part = opt.positive("tau_part", 1e-3);
  } else if (sc == "area_growth") {
    require(cfg.time.t_final > 0.0, "time.t_final", "must be > 0");
    o.fit_window = opt.positive("fit_window", 0.1 * cfg.time.t_final);
    require(o.fit_window <= cfg.time.t_final, opt.field("fit_window"), "must not exceed time.t_final");
  }
  opt.finish();
  root.finish();

  cfg.canonical = doc.dump();
  cfg.hash = sha256_hex(cfg.canonical);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::config, path.string() + ": cannot read config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace qbm::experiments
