#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "../src/experiments/io.hpp"
#include "qbm/experiments.hpp"

using namespace qbm;
using namespace qbm::experiments;
namespace fs = std::filesystem;

namespace {

const char* small_run = R"({
  // coherent state in a harmonic well with the bath on
  "scenario": "gaussian_vs_grid",
  "params": { "mass": 1.0, "gamma": 0.1, "kT": 1.0, "hbar": 1.0 },
  "potential": { "family": "harmonic", "m_omega2": 1.0 },
  "initial": { "sigma": 2.0, "F": 0.5, "q": 1.0 },
  "grid": { "n_u": 64, "n_s": 64, "l_u": 8.0, "l_s": 8.0 },
  "time": { "t_final": 1.0, "dt": 0.02, "sample_every": 5 },
  "output": { "snapshots": true, "gnuplot": true }
})";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "qbm_test_experiments" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::config);
    return e.what();
  }
  FAIL("expected a config error");
  return {};
}

std::string with(const std::string& from, const std::string& to) {
  std::string s = small_run;
  const auto at = s.find(from);
  REQUIRE(at != std::string::npos);
  s.replace(at, from.size(), to);
  return s;
}

int run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + QBM_CLI_PATH + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

fs::path write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

}  // namespace

TEST_CASE("csv numbers carry 17 significant digits") {
  CHECK(fmt(0.1) == "0.10000000000000001");
  CHECK(fmt(1.0 / 3.0) == "0.33333333333333331");
  CHECK(fmt(2.0) == "2");
  CHECK(fmt(1e-20) == "9.9999999999999995e-21");
  CHECK(std::stod(fmt(2.0 / 7.0)) == 2.0 / 7.0);
}

TEST_CASE("config fields are checked by name") {
  const auto ok = parse_config(small_run);
  CHECK(ok.scenario == "gaussian_vs_grid");
  CHECK(ok.grid.n_u == 64);
  CHECK(ok.time.sample_every == 5);
  CHECK(ok.snapshots);

  CHECK(config_error(with("\"gamma\"", "\"gama\"")).find("params.gama: unknown field") != std::string::npos);
  CHECK(config_error(with("\"n_u\": 64", "\"n_u\": 60")).find("grid.n_u") != std::string::npos);
  CHECK(config_error(with("\"dt\": 0.02", "\"dt\": -1")).find("time.dt: must be > 0") != std::string::npos);
  CHECK(config_error(with("\"sigma\": 2.0", "\"sigma\": 4.0")).find("initial") != std::string::npos);
  CHECK(config_error(with("\"harmonic\"", "\"cubic\"")).find("potential.family") != std::string::npos);
  CHECK(config_error(with("\"gaussian_vs_grid\"", "\"nope\"")).find("scenario") != std::string::npos);
  CHECK(config_error(with("\"m_omega2\": 1.0", "\"m_omega2\": \"one\"")).find("expected a number") !=
        std::string::npos);
  CHECK(config_error(with("{ \"sigma\"", "[ \"sigma\"")).find("<document>") != std::string::npos);
  CHECK(config_error(R"({"scenario": "area_growth", "params": {}})").find("initial: missing") !=
        std::string::npos);
  CHECK(config_error(R"({"scenario": "projector_quality", "grid": {"n_u": 64, "n_s": 64, "l_u": 5, "l_s": 5},
                         "cells": [{"rectangle": [0, 1, 0, 1]}]})")
            .find("matrix form") != std::string::npos);
  CHECK(config_error(R"({"scenario": "histories_two_time", "grid": {"matrix_n": 32, "matrix_l": 8},
                         "initial": {"sigma": 1, "F": 1}, "time": {"dt": 0.1},
                         "cells": [{"rectangle": [0, 1, 0, 1]}], "options": {"times": [1, 0.5]}})")
            .find("options.times") != std::string::npos);
}

TEST_CASE("config hash ignores comments and layout but not values") {
  const auto a = parse_config(small_run);
  const auto b = parse_config(nlohmann::json::parse(small_run, nullptr, true, true).dump(4));
  CHECK(a.hash == b.hash);
  CHECK(a.hash.size() == 64);
  CHECK(parse_config(with("\"q\": 1.0", "\"q\": 1.5")).hash != a.hash);
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("oversized grids are refused by the cost guard") {
  try {
    parse_config(with("\"n_u\": 64, \"n_s\": 64", "\"n_u\": 4096, \"n_s\": 2048"));
    FAIL("expected cost_guard");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::cost_guard);
  }
}

TEST_CASE("every scenario has a description") {
  for (const auto& tag : scenario_tags()) CHECK(describe(tag).find(tag) == 0);
  CHECK_THROWS_AS(describe("nope"), Error);
}

TEST_CASE("runs are deterministic and stamped with provenance") {
  const auto cfg = parse_config(small_run);
  const auto a = scratch("run_a"), b = scratch("run_b");
  const auto ra = run_experiment(cfg, a);
  const auto rb = run_experiment(cfg, b);
  REQUIRE(ra.exit_code == 0);
  REQUIRE(rb.exit_code == 0);
  REQUIRE(ra.files.size() == rb.files.size());
  for (std::size_t i = 0; i < ra.files.size(); ++i) {
    CHECK(ra.files[i].filename() == rb.files[i].filename());
    CHECK(slurp(ra.files[i]) == slurp(rb.files[i]));
  }
  for (const char* name : {"traj.csv", "grid_moments.csv", "summary.json", "rho_final.json", "traj.gp"}) {
    const auto text = slurp(a / name);
    CHECK_MESSAGE(text.find(cfg.hash) != std::string::npos, name);
    CHECK_MESSAGE(text.find(code_version()) != std::string::npos, name);
    CHECK(text.find('\r') == std::string::npos);
  }

  std::istringstream traj(slurp(a / "traj.csv"));
  std::string line;
  for (int i = 0; i < 3; ++i) {
    std::getline(traj, line);
    CHECK(line[0] == '#');
  }
  std::getline(traj, line);
  CHECK(line == "t,q,p,Sigma,F,r,dq2,dp2,cpq,A,purity,hs_gap");
  int rows = 0;
  double worst = 0.0;
  while (std::getline(traj, line)) {
    ++rows;
    worst = std::max(worst, std::stod(line.substr(line.rfind(',') + 1)));
  }
  CHECK(rows == 11);
  CHECK(worst < 1e-3);

  const auto side = nlohmann::json::parse(slurp(a / "rho_final.json"));
  for (const char* key : {"n_u", "n_s", "l_u", "l_s", "t", "hbar", "mass", "gamma", "kT", "eta", "config_hash"}) {
    CHECK_MESSAGE(side.contains(key), key);
  }
  CHECK(side["t"].get<double>() == 1.0);
  CHECK(fs::file_size(a / "rho_final.bin") == 64u * 64u * 16u);
}

TEST_CASE("snapshot bytes are little-endian (re, im) pairs") {
  const GridSpec spec(32, 32, 4.0, 4.0);
  GridOperator k(spec);
  k(0, 0) = cplx(1.5, -2.0);
  k(0, 1) = cplx(0.25, 0.0);
  const auto dir = scratch("snapshot");
  write_snapshot(dir / "k.bin", k, {}, {"h", "v", "s"});
  const auto bytes = slurp(dir / "k.bin");
  REQUIRE(bytes.size() == spec.size() * 16);
  const unsigned char one_and_half[8] = {0, 0, 0, 0, 0, 0, 0xf8, 0x3f};
  CHECK(std::equal(one_and_half, one_and_half + 8, reinterpret_cast<const unsigned char*>(bytes.data())));
  double v[3];
  std::memcpy(v, bytes.data() + 8, 24);
  CHECK(v[0] == -2.0);
  CHECK(v[1] == 0.25);
  CHECK(v[2] == 0.0);
}

TEST_CASE("command-line exit codes") {
  const auto dir = scratch("cli");
  const auto good = write_file(dir / "good.json", small_run);
  CHECK(run_cli("validate --config " + good.string()) == 0);
  CHECK(run_cli("describe --scenario histories_n_time") == 0);
  CHECK(run_cli("describe --scenario nope") == 2);
  CHECK(run_cli("validate --config " + (dir / "missing.json").string()) == 2);
  CHECK(run_cli("validate --config " + write_file(dir / "bad.json", with("\"kT\"", "\"KT\"")).string()) == 2);
  CHECK(run_cli("frobnicate") == 2);

  CHECK(run_cli("run --config " + good.string() + " --out " + (dir / "t1").string(), "QBM_THREADS=1") == 0);
  CHECK(run_cli("run --config " + good.string() + " --out " + (dir / "t2").string()) == 0);
  CHECK(slurp(dir / "t1" / "traj.csv") == slurp(dir / "t2" / "traj.csv"));
  CHECK(slurp(dir / "t1" / "rho_final.bin") == slurp(dir / "t2" / "rho_final.bin"));

  // Initial state hanging over the grid edge.
  const auto edge = write_file(dir / "edge.json", with("\"q\": 1.0", "\"q\": 7.5"));
  CHECK(run_cli("run --config " + edge.string() + " --out " + (dir / "edge").string()) == 3);
  const auto diag = nlohmann::json::parse(slurp(dir / "edge" / "diagnostic.json"));
  CHECK(diag["error"] == "aliasing");
  CHECK(diag["exit_code"] == 3);
  CHECK(diag.contains("config_hash"));

  const auto huge = write_file(dir / "huge.json", with("\"n_u\": 64, \"n_s\": 64", "\"n_u\": 4096, \"n_s\": 2048"));
  CHECK(run_cli("validate --config " + huge.string()) == 4);

  std::ostringstream times;
  for (int k = 0; k < 14; ++k) times << (k ? ", " : "") << 2.0 * (k + 1);
  const auto chain = write_file(dir / "chain.json", R"({
    "scenario": "histories_n_time",
    "params": { "mass": 1.0, "gamma": 0.1, "kT": 1.0 },
    "potential": { "family": "harmonic", "m_omega2": 1.0 },
    "initial": { "sigma": 1.0, "F": 1.0 },
    "grid": { "matrix_n": 32, "matrix_l": 8.0 },
    "cells": [ { "rectangle": [-2.0, 2.0, -2.0, 2.0] } ],
    "time": { "dt": 0.1 },
    "options": { "times": [)" + times.str() + R"(], "tau_part": 0.5 }
  })");
  CHECK(run_cli("run --config " + chain.string() + " --out " + (dir / "chain").string()) == 4);
  CHECK(fs::exists(dir / "chain" / "diagnostic.json"));
}
