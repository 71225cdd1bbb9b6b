#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "btm/simnet.hpp"

namespace btm {

enum class Detector : int { kProposed = 0, kCusum = 1 };
inline constexpr Detector kDetectors[] = {Detector::kProposed, Detector::kCusum};
const char* detector_name(Detector d) noexcept;

/// Error rates of one detector at one step, normalized by the total node count.
///
/// Stored as counts, so er() is exactly mdr() + far().
struct StepMetrics {
  Detector detector = Detector::kProposed;
  int step = 0;
  int run = 0;
  int misses = 0;        ///< truth = 1, e = 0
  int false_alarms = 0;  ///< truth = 0, e = 1
  int total = 0;

  double mdr() const noexcept { return static_cast<double>(misses) / total; }
  double far() const noexcept { return static_cast<double>(false_alarms) / total; }
  double er() const noexcept { return mdr() + far(); }
};

/// Throws LengthMismatch when the vectors differ in length.
StepMetrics compute_metrics(std::span<const EventIndicator> indicators,
                            std::span<const EventIndicator> truth);

/// One full scenario run.
struct RunRecord {
  int run = 0;
  std::uint64_t seed = 0;
  std::vector<Node> nodes;                          ///< state after the last step
  std::vector<std::vector<NodeStepRecord>> steps;   ///< steps[k-1][node]
  std::vector<StepMetrics> metrics;                 ///< ordered by (step, detector)
};

/// Seed of Monte Carlo run `run` under `master_seed`.
std::uint64_t run_seed(std::uint64_t master_seed, int run) noexcept;

RunRecord run_scenario(const ScenarioConfig& config, std::uint64_t seed, int run = 0);

struct SummaryRow {
  Detector detector = Detector::kProposed;
  int step = 0;
  int runs = 0;
  double mean_mdr = 0.0;
  double mean_far = 0.0;
  double mean_er = 0.0;  ///< mean_mdr + mean_far
  double std_mdr = 0.0;
  double std_far = 0.0;
  double std_er = 0.0;   ///< sample standard deviation across runs
};

struct MonteCarloResult {
  std::vector<std::uint64_t> seeds;      ///< seeds[run]
  std::vector<StepMetrics> per_run;      ///< ordered by (run, step, detector)
  std::vector<SummaryRow> summary;       ///< ordered by (detector, step)

  const SummaryRow& row(Detector d, int step) const;
};

/// Executes `runs` scenarios with seeds derived from config.master_seed.
MonteCarloResult monte_carlo(const ScenarioConfig& config, int runs);

struct SweepRow {
  double rate = 0.0;
  Detector detector = Detector::kProposed;
  int step = 0;
  int runs = 0;
  double mean_mdr = 0.0;
  double mean_far = 0.0;
  double mean_er = 0.0;
  double std_er = 0.0;
  double stderr_er = 0.0;  ///< std_er / sqrt(runs)
};

/// Monte Carlo at each failure rate, reported at one step.
std::vector<SweepRow> sweep_failure_rate(const ScenarioConfig& config,
                                         std::span<const double> rates, int runs, int step = 3);

/// Smallest CUSUM threshold giving zero false alarms on fault-free runs: the
/// largest statistic ever seen at a non-event node, floored at `floor`.
double calibrate_cusum_threshold(const ScenarioConfig& config, int runs, double floor = 1.0);

// CSV output. Every file carries a header row; missing readings are empty fields.
void write_trace_csv(std::ostream& out, const RunRecord& record);
void write_metrics_csv(std::ostream& out, std::span<const StepMetrics> metrics);
void write_summary_csv(std::ostream& out, const MonteCarloResult& result);
void write_seeds_csv(std::ostream& out, std::span<const std::uint64_t> seeds);
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

}  // namespace btm
