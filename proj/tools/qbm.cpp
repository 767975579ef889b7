// qbm: run, validate and describe experiment configs.

#include <omp.h>

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qbm/experiments.hpp"

namespace ex = qbm::experiments;

namespace {

void apply_thread_cap() {
  const char* env = std::getenv("QBM_THREADS");
  if (!env || !*env) return;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) {
    std::cerr << "qbm: ignoring QBM_THREADS='" << env << "' (expected a positive integer)\n";
    return;
  }
  if (n < omp_get_max_threads()) omp_set_num_threads(static_cast<int>(n));
}

int report(const qbm::Error& e) {
  std::cerr << "qbm: " << qbm::to_string(e.kind()) << ": " << e.what() << "\n";
  return ex::exit_code_for(e.kind());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum Brownian motion experiments"};
  app.set_version_flag("--version", ex::code_version());
  app.require_subcommand(1);

  std::string config_path, out_dir, scenario;

  auto* run = app.add_subcommand("run", "Run a scenario config and write its artifacts");
  run->add_option("--config", config_path, "JSON config file")->required();
  run->add_option("--out", out_dir, "Output directory")->required();

  auto* validate = app.add_subcommand("validate", "Check a config without running it");
  validate->add_option("--config", config_path, "JSON config file")->required();

  auto* describe = app.add_subcommand("describe", "Describe a scenario");
  describe->add_option("--scenario", scenario, "Scenario tag")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  apply_thread_cap();

  try {
    if (*describe) {
      std::cout << ex::describe(scenario);
      return 0;
    }
    const auto cfg = ex::load_config(config_path);
    if (*validate) {
      std::cout << "ok " << cfg.scenario << " config_hash=" << cfg.hash << "\n";
      return 0;
    }
    const auto outcome = ex::run_experiment(cfg, out_dir);
    if (outcome.exit_code != 0) {
      std::cerr << "qbm: " << outcome.message << "\n";
      return outcome.exit_code;
    }
    for (const auto& f : outcome.files) std::cout << f.string() << "\n";
    return 0;
  } catch (const qbm::Error& e) {
    return report(e);
  }
}
