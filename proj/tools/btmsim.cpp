// btmsim: run trust-model event-region detection scenarios and write CSV results.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "btm/errors.hpp"
#include "btm/harness.hpp"
#include "btm/scenario_io.hpp"

namespace fs = std::filesystem;

namespace {

btm::ScenarioConfig load_or_default(const std::string& path) {
  if (path.empty()) {
    btm::ScenarioConfig c;
    c.validate();
    return c;
  }
  return btm::load_scenario(path);
}

std::ofstream open_out(const fs::path& dir, const char* name) {
  fs::create_directories(dir);
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trust-model event region detection simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  int runs = 30;
  int step = 3;
  std::vector<double> rates{0.05, 0.10, 0.15, 0.20, 0.25, 0.30};

  auto* simulate = app.add_subcommand("simulate", "Run one scenario; writes trace.csv and metrics.csv");
  simulate->add_option("--config", config_path, "Scenario JSON file (defaults if omitted)");
  simulate->add_option("--seed", seed, "Run seed (default: seed of Monte Carlo run 0)");
  simulate->add_option("--out", out_dir, "Output directory")->required();

  auto* montecarlo = app.add_subcommand("montecarlo", "Repeat a scenario; writes summary.csv and seeds.csv");
  montecarlo->add_option("--config", config_path, "Scenario JSON file (defaults if omitted)");
  montecarlo->add_option("--runs", runs, "Number of independent runs")->check(CLI::PositiveNumber);
  montecarlo->add_option("--out", out_dir, "Output directory")->required();

  auto* sweep = app.add_subcommand("sweep", "Monte Carlo over failure rates; writes sweep.csv");
  sweep->add_option("--config", config_path, "Scenario JSON file (defaults if omitted)");
  sweep->add_option("--rates", rates, "Comma-separated failure rates")->delimiter(',');
  sweep->add_option("--runs", runs, "Runs per rate")->check(CLI::PositiveNumber);
  sweep->add_option("--step", step, "Step at which error rates are reported")->check(CLI::PositiveNumber);
  sweep->add_option("--out", out_dir, "Output directory")->required();

  auto* calibrate = app.add_subcommand("calibrate-cusum", "Print the fault-free CUSUM threshold");
  calibrate->add_option("--config", config_path, "Scenario JSON file (defaults if omitted)");
  calibrate->add_option("--runs", runs, "Fault-free calibration runs")->check(CLI::PositiveNumber);

  auto* show = app.add_subcommand("show-config", "Print the effective scenario as JSON");
  show->add_option("--config", config_path, "Scenario JSON file (defaults if omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto config = load_or_default(config_path);
    const fs::path dir(out_dir);

    if (*simulate) {
      const auto s = seed.value_or(btm::run_seed(config.master_seed, 0));
      const auto record = btm::run_scenario(config, s);
      auto trace = open_out(dir, "trace.csv");
      btm::write_trace_csv(trace, record);
      auto metrics = open_out(dir, "metrics.csv");
      btm::write_metrics_csv(metrics, record.metrics);
    } else if (*montecarlo) {
      const auto result = btm::monte_carlo(config, runs);
      auto summary = open_out(dir, "summary.csv");
      btm::write_summary_csv(summary, result);
      auto seeds = open_out(dir, "seeds.csv");
      btm::write_seeds_csv(seeds, result.seeds);
    } else if (*sweep) {
      const auto rows = btm::sweep_failure_rate(config, rates, runs, step);
      auto out = open_out(dir, "sweep.csv");
      btm::write_sweep_csv(out, rows);
    } else if (*calibrate) {
      std::cout << btm::calibrate_cusum_threshold(config, runs) << "\n";
    } else if (*show) {
      std::cout << btm::scenario_to_json(config).dump(2) << "\n";
    }
  } catch (const btm::InvalidConfig& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
