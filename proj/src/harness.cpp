#include "btm/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "btm/errors.hpp"

namespace btm {

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

struct Moments {
  double sum = 0.0;
  double sum_sq = 0.0;
  int n = 0;

  void add(double x) {
    sum += x;
    sum_sq += x * x;
    ++n;
  }
  double mean() const { return n ? sum / n : 0.0; }
  double sample_std() const {
    if (n < 2) return 0.0;
    const double m = mean();
    return std::sqrt(std::max(0.0, (sum_sq - n * m * m) / (n - 1)));
  }
};

}  // namespace

const char* detector_name(Detector d) noexcept {
  return d == Detector::kProposed ? "proposed" : "cusum";
}

StepMetrics compute_metrics(std::span<const EventIndicator> indicators,
                            std::span<const EventIndicator> truth) {
  if (indicators.size() != truth.size()) throw LengthMismatch(indicators.size(), truth.size());
  if (indicators.empty()) throw InvalidConfig("metrics need at least one node");
  StepMetrics m;
  m.total = static_cast<int>(indicators.size());
  for (std::size_t i = 0; i < indicators.size(); ++i) {
    if (truth[i] == EventIndicator::kEvent && indicators[i] == EventIndicator::kNonEvent) ++m.misses;
    if (truth[i] == EventIndicator::kNonEvent && indicators[i] == EventIndicator::kEvent) {
      ++m.false_alarms;
    }
  }
  return m;
}

std::uint64_t run_seed(std::uint64_t master_seed, int run) noexcept {
  return derive_seed(master_seed, {static_cast<std::uint64_t>(Stream::kRun),
                                   static_cast<std::uint64_t>(run)});
}

RunRecord run_scenario(const ScenarioConfig& config, std::uint64_t seed, int run) {
  Network net(config, seed);
  RunRecord rec;
  rec.run = run;
  rec.seed = seed;
  rec.steps.reserve(static_cast<std::size_t>(config.horizon));
  for (int k = 1; k <= config.horizon; ++k) {
    auto records = net.step();
    std::vector<EventIndicator> truth, proposed, cusum;
    truth.reserve(records.size());
    for (const auto& r : records) {
      truth.push_back(r.truth);
      proposed.push_back(r.btm);
      cusum.push_back(r.cusum);
    }
    for (Detector d : kDetectors) {
      auto m = compute_metrics(d == Detector::kProposed ? proposed : cusum, truth);
      m.detector = d;
      m.step = k;
      m.run = run;
      rec.metrics.push_back(m);
    }
    rec.steps.push_back(std::move(records));
  }
  rec.nodes = net.nodes();
  return rec;
}

const SummaryRow& MonteCarloResult::row(Detector d, int step) const {
  for (const auto& r : summary) {
    if (r.detector == d && r.step == step) return r;
  }
  throw InvalidConfig("no summary row for step " + std::to_string(step));
}

MonteCarloResult monte_carlo(const ScenarioConfig& config, int runs) {
  if (runs < 1) throw InvalidConfig("runs must be >= 1");
  config.validate();
  MonteCarloResult result;
  for (int r = 0; r < runs; ++r) {
    const auto seed = run_seed(config.master_seed, r);
    result.seeds.push_back(seed);
    auto rec = run_scenario(config, seed, r);
    result.per_run.insert(result.per_run.end(), rec.metrics.begin(), rec.metrics.end());
  }
  // Fold in (run, step) order.
  for (Detector d : kDetectors) {
    for (int k = 1; k <= config.horizon; ++k) {
      Moments mdr, far, er;
      for (const auto& m : result.per_run) {
        if (m.detector != d || m.step != k) continue;
        mdr.add(m.mdr());
        far.add(m.far());
        er.add(m.er());
      }
      SummaryRow row;
      row.detector = d;
      row.step = k;
      row.runs = runs;
      row.mean_mdr = mdr.mean();
      row.mean_far = far.mean();
      row.mean_er = row.mean_mdr + row.mean_far;
      row.std_mdr = mdr.sample_std();
      row.std_far = far.sample_std();
      row.std_er = er.sample_std();
      result.summary.push_back(row);
    }
  }
  return result;
}

std::vector<SweepRow> sweep_failure_rate(const ScenarioConfig& config,
                                         std::span<const double> rates, int runs, int step) {
  if (step < 1 || step > config.horizon) throw InvalidConfig("sweep step outside the horizon");
  std::vector<SweepRow> rows;
  for (double rate : rates) {
    if (!(rate >= 0.0 && rate <= 1.0)) throw InvalidConfig("failure rate outside [0,1]");
    ScenarioConfig c = config;
    c.failure_rate = rate;
    const auto mc = monte_carlo(c, runs);
    for (Detector d : kDetectors) {
      const auto& s = mc.row(d, step);
      rows.push_back(SweepRow{rate, d, step, runs, s.mean_mdr, s.mean_far, s.mean_er, s.std_er,
                              s.std_er / std::sqrt(static_cast<double>(runs))});
    }
  }
  return rows;
}

double calibrate_cusum_threshold(const ScenarioConfig& config, int runs, double floor) {
  ScenarioConfig c = config;
  c.failure_rate = 0.0;
  c.fault_plan.clear();
  double worst = 0.0;
  for (int r = 0; r < runs; ++r) {
    Network net(c, run_seed(c.master_seed, r));
    for (int k = 1; k <= c.horizon; ++k) {
      const auto records = net.step();
      for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].truth == EventIndicator::kEvent) continue;
        const auto& s = net.nodes()[i].cusum;
        worst = std::max({worst, s.s_plus, s.s_minus});
      }
    }
  }
  return std::max(worst, floor);
}

void write_trace_csv(std::ostream& out, const RunRecord& record) {
  out << "step,node_id,x,y,truth,faulty,reading,trust_hat,e,detector\n";
  for (std::size_t s = 0; s < record.steps.size(); ++s) {
    for (const auto& r : record.steps[s]) {
      const auto& pos = record.nodes[static_cast<std::size_t>(r.node_id)].position;
      const std::string prefix = std::to_string(s + 1) + "," + std::to_string(r.node_id) + "," +
                                 real(pos.x) + "," + real(pos.y) + "," +
                                 std::to_string(to_int(r.truth)) + "," + (r.faulty ? "1" : "0") +
                                 "," + (r.reading ? fixed(*r.reading, 6) : std::string{}) + ",";
      out << prefix << fixed(r.trust.value(), 6) << "," << to_int(r.btm) << ",proposed\n";
      out << prefix << "," << to_int(r.cusum) << ",cusum\n";
    }
  }
}

void write_metrics_csv(std::ostream& out, std::span<const StepMetrics> metrics) {
  out << "run,step,detector,mdr,far,er\n";
  for (const auto& m : metrics) {
    out << m.run << "," << m.step << "," << detector_name(m.detector) << "," << fixed(m.mdr(), 4)
        << "," << fixed(m.far(), 4) << "," << fixed(m.er(), 4) << "\n";
  }
}

void write_summary_csv(std::ostream& out, const MonteCarloResult& result) {
  out << "step,detector,runs,mean_mdr,std_mdr,mean_far,std_far,mean_er,std_er\n";
  for (const auto& r : result.summary) {
    out << r.step << "," << detector_name(r.detector) << "," << r.runs << ","
        << fixed(r.mean_mdr, 4) << "," << fixed(r.std_mdr, 4) << "," << fixed(r.mean_far, 4) << ","
        << fixed(r.std_far, 4) << "," << fixed(r.mean_er, 4) << "," << fixed(r.std_er, 4) << "\n";
  }
}

void write_seeds_csv(std::ostream& out, std::span<const std::uint64_t> seeds) {
  out << "run,seed\n";
  for (std::size_t r = 0; r < seeds.size(); ++r) out << r << "," << seeds[r] << "\n";
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "rate,detector,step,runs,mean_mdr,mean_far,mean_er,std_er,stderr_er\n";
  for (const auto& r : rows) {
    out << fixed(r.rate, 4) << "," << detector_name(r.detector) << "," << r.step << "," << r.runs
        << "," << fixed(r.mean_mdr, 4) << "," << fixed(r.mean_far, 4) << "," << fixed(r.mean_er, 4)
        << "," << fixed(r.std_er, 4) << "," << fixed(r.stderr_er, 4) << "\n";
  }
}

}  // namespace btm
