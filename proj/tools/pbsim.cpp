#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "pbsim/io.hpp"

namespace {

int workers_from_env() {
  const char* env = std::getenv("PBSIM_WORKERS");
  if (!env) return 1;
  const int n = std::atoi(env);
  return n > 0 ? n : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pbsim: single-qubit noisy-gate simulator and purity-benchmarking estimator"};
  app.require_subcommand(1);

  std::string config_path, records_path, estimates_path, out_dir;
  std::string t1_grid_path;

  auto* simulate = app.add_subcommand("simulate", "Run the configured experiment plan");
  simulate->add_option("--config", config_path, "Run configuration (JSON)")->required();
  simulate->add_option("--out", out_dir, "Output directory")->required();

  auto* analyze = app.add_subcommand("analyze", "Window the records and fit error budgets");
  analyze->add_option("--records", records_path, "records.csv from simulate")->required();
  analyze->add_option("--config", config_path, "Run configuration (JSON)")->required();
  analyze->add_option("--out", out_dir, "Output directory")->required();

  auto* report = app.add_subcommand("report", "Emit plot-ready CSVs from estimates");
  report->add_option("--estimates", estimates_path, "estimates.csv from analyze")->required();
  report->add_option("--t1-grid", t1_grid_path, "Optional t1_grid.csv to canonicalize");
  report->add_option("--out", out_dir, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  const int workers = workers_from_env();
  if (simulate->parsed()) {
    return pbsim::cmd_simulate(config_path, out_dir, workers, std::cerr);
  }
  if (analyze->parsed()) {
    return pbsim::cmd_analyze(records_path, config_path, out_dir, workers, std::cerr);
  }
  std::optional<std::filesystem::path> t1;
  if (!t1_grid_path.empty()) t1 = t1_grid_path;
  return pbsim::cmd_report(estimates_path, t1, out_dir, std::cerr);
}
