#include <sstream>
#include <string>
#include <vector>

#include "btm/errors.hpp"
#include "btm/harness.hpp"
#include "doctest.h"

using namespace btm;

namespace {

constexpr auto E = EventIndicator::kEvent;
constexpr auto N = EventIndicator::kNonEvent;

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("compute_metrics") {
  SUBCASE("two misses and one false alarm out of 100") {
    std::vector<EventIndicator> truth(100, N), e(100, N);
    for (int i = 0; i < 30; ++i) truth[static_cast<std::size_t>(i)] = e[static_cast<std::size_t>(i)] = E;
    e[0] = N;
    e[1] = N;
    e[99] = E;
    const auto m = compute_metrics(e, truth);
    CHECK(m.mdr() == doctest::Approx(0.02));
    CHECK(m.far() == doctest::Approx(0.01));
    CHECK(m.er() == doctest::Approx(0.03));
    CHECK(m.er() == m.mdr() + m.far());
  }
  SUBCASE("perfect detection") {
    const std::vector<EventIndicator> t{E, N, N, E};
    const auto m = compute_metrics(t, t);
    CHECK(m.mdr() == 0.0);
    CHECK(m.far() == 0.0);
    CHECK(m.er() == 0.0);
  }
  SUBCASE("everything inverted on a half-event field") {
    std::vector<EventIndicator> truth, e;
    for (int i = 0; i < 50; ++i) {
      truth.push_back(i % 2 ? E : N);
      e.push_back(i % 2 ? N : E);
    }
    CHECK(compute_metrics(e, truth).er() == 1.0);
  }
  SUBCASE("length mismatch") {
    const std::vector<EventIndicator> a{E, N}, b{E};
    CHECK_THROWS_AS(compute_metrics(a, b), LengthMismatch);
  }
}

TEST_CASE("monte_carlo") {
  ScenarioConfig c;
  SUBCASE("a single run equals that run's metrics") {
    const auto mc = monte_carlo(c, 1);
    const auto single = run_scenario(c, run_seed(c.master_seed, 0));
    REQUIRE(mc.seeds.size() == 1);
    CHECK(mc.seeds[0] == single.seed);
    for (const auto& m : single.metrics) {
      const auto& row = mc.row(m.detector, m.step);
      CHECK(row.mean_mdr == m.mdr());
      CHECK(row.mean_far == m.far());
      CHECK(row.mean_er == m.er());
      CHECK(row.std_er == 0.0);
    }
  }
  SUBCASE("seed ledger re-executes any run in isolation") {
    const auto mc = monte_carlo(c, 4);
    const auto rerun = run_scenario(c, mc.seeds[2], 2);
    for (const auto& m : rerun.metrics) {
      const auto it = std::find_if(mc.per_run.begin(), mc.per_run.end(), [&](const StepMetrics& x) {
        return x.run == 2 && x.step == m.step && x.detector == m.detector;
      });
      REQUIRE(it != mc.per_run.end());
      CHECK(it->misses == m.misses);
      CHECK(it->false_alarms == m.false_alarms);
    }
  }
  SUBCASE("fault-free network is essentially error free") {
    c.failure_rate = 0.0;
    const auto mc = monte_carlo(c, 30);
    for (int k = 1; k <= c.horizon; ++k) CHECK(mc.row(Detector::kProposed, k).mean_er <= 0.01);
  }
  CHECK_THROWS_AS(monte_carlo(c, 0), InvalidConfig);
}

TEST_CASE("sweep_failure_rate") {
  ScenarioConfig c;
  const std::vector<double> zero{0.0};
  const auto rows = sweep_failure_rate(c, zero, 10, 3);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].detector == Detector::kProposed);
  CHECK(rows[0].mean_er <= 0.005);
  CHECK(rows[0].step == 3);

  const std::vector<double> bad{1.2};
  CHECK_THROWS_AS(sweep_failure_rate(c, bad, 2, 3), InvalidConfig);
  CHECK_THROWS_AS(sweep_failure_rate(c, zero, 2, 9), InvalidConfig);
}

TEST_CASE("frozen cusum threshold is the fault-free calibration") {
  ScenarioConfig c;
  CHECK(calibrate_cusum_threshold(c, 30, c.patterns.noise_std) == c.cusum.threshold);
}

TEST_CASE("csv output") {
  ScenarioConfig c;
  c.horizon = 2;
  c.fault_plan = {{0, FaultSpec{SleeperFault{}, 1}}};
  const auto rec = run_scenario(c, 5);

  std::ostringstream trace;
  write_trace_csv(trace, rec);
  const auto t = lines(trace.str());
  CHECK(t.front() == "step,node_id,x,y,truth,faulty,reading,trust_hat,e,detector");
  CHECK(t.size() == 1 + 2 * 100 * 2);
  CHECK(t[1].rfind("1,0,1,1,0,1,,", 0) == 0);  // sleeper: empty reading field
  CHECK(t[1].ends_with(",proposed"));
  CHECK(t[2].ends_with(",,0,cusum"));

  std::ostringstream metrics;
  write_metrics_csv(metrics, rec.metrics);
  const auto m = lines(metrics.str());
  CHECK(m.front() == "run,step,detector,mdr,far,er");
  CHECK(m.size() == 1 + 2 * 2);
  CHECK(m[1].rfind("0,1,proposed,", 0) == 0);

  const auto mc = monte_carlo(c, 2);
  std::ostringstream summary, seeds;
  write_summary_csv(summary, mc);
  write_seeds_csv(seeds, mc.seeds);
  CHECK(lines(summary.str()).front() == "step,detector,runs,mean_mdr,std_mdr,mean_far,std_far,mean_er,std_er");
  CHECK(lines(seeds.str()).size() == 3);
  CHECK(lines(seeds.str())[1] == "0," + std::to_string(mc.seeds[0]));

  std::ostringstream sweep;
  const std::vector<double> rates{0.1};
  write_sweep_csv(sweep, sweep_failure_rate(c, rates, 2, 2));
  const auto s = lines(sweep.str());
  CHECK(s.front() == "rate,detector,step,runs,mean_mdr,mean_far,mean_er,std_er,stderr_er");
  CHECK(s[1].rfind("0.1000,proposed,2,2,", 0) == 0);
}
