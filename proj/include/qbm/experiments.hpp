#pragma once

// Config-driven scenario runner behind the qbm command-line tool. A config
// is a JSON document (comments allowed); its SHA-256 over the canonical
// dump is stamped into every output together with the code version.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qbm/cell.hpp"
#include "qbm/core.hpp"
#include "qbm/grid/grid.hpp"
#include "qbm/grid/propagator.hpp"
#include "qbm/quasiprojector.hpp"

namespace qbm::experiments {

inline const std::vector<std::string>& scenario_tags() {
  static const std::vector<std::string> tags{"gaussian_vs_grid",    "equilibrium",        "hbar_sweep",
                                             "projector_quality",   "projector_transport", "histories_two_time",
                                             "histories_n_time",    "area_growth"};
  return tags;
}

std::string code_version();

struct TimeGrid {
  double t_final = 1.0;
  double dt = 0.01;
  int sample_every = 10;
  Scheme scheme = Scheme::strang;
};

struct SmearingChoice {
  bool max_resolution = true;
  Smearing explicit_value;
};

struct ScenarioOptions {
  // hbar_sweep
  std::vector<double> hbars;
  double ode_dt = 1e-4;
  // projector_quality
  std::optional<SmearingChoice> alt_smearing;
  // projector_transport
  std::vector<double> times;
  bool decoys = true;
  // histories
  std::vector<double> history_times;
  bool transport_chain = true;
  bool full_table = true;
  double tau_part = 1e-3;
  // area_growth
  double fit_window = 0.0;
};

struct ExperimentConfig {
  std::string scenario;
  PhysicalParams params;
  PotentialModel potential = PotentialModel::free_particle();
  GaussianState initial;
  GridSpec grid;
  TimeGrid time;
  std::vector<PhaseSpaceCell> cells;
  SmearingChoice smearing;
  ScenarioOptions options;
  bool snapshots = false;
  bool gnuplot = false;
  std::string canonical;  // canonical JSON dump
  std::string hash;       // SHA-256 hex of `canonical`
};

/// Parses and validates a config document. Throws Error(config) naming the
/// offending field.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// SHA-256 hex digest.
std::string sha256_hex(const std::string& data);

/// Human-readable description of a scenario; throws Error(config) on an
/// unknown tag.
std::string describe(const std::string& scenario);

struct RunOutcome {
  int exit_code = 0;
  std::vector<std::filesystem::path> files;
  std::string message;
};

/// 0 ok, 2 config error, 3 numerical breakdown, 4 cost-guard refusal,
/// 1 anything else.
int exit_code_for(ErrorKind kind);

/// Runs the scenario and writes its artifacts under out_dir. Errors are
/// mapped to exit codes; codes 3 and 4 also write diagnostic.json.
RunOutcome run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir);

}  // namespace qbm::experiments
