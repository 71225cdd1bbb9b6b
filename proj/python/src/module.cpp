#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "btm/errors.hpp"
#include "btm/grid_filter.hpp"
#include "btm/harness.hpp"
#include "btm/scenario_io.hpp"

namespace py = pybind11;
using namespace btm;

namespace {

std::vector<double> to_vector(std::span<const double> s) { return {s.begin(), s.end()}; }

template <typename Writer, typename T>
std::string csv(Writer w, const T& value) {
  std::ostringstream out;
  w(out, value);
  return out.str();
}

}  // namespace

PYBIND11_MODULE(_btm, m) {
  m.doc() = "Bayesian trust model for fault-tolerant event region detection";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidConfig>(m, "InvalidConfig", base.ptr());
  py::register_exception<EmptyCommunity>(m, "EmptyCommunity", base.ptr());
  py::register_exception<MissingCenterReading>(m, "MissingCenterReading", base.ptr());
  py::register_exception<LengthMismatch>(m, "LengthMismatch", base.ptr());
  py::register_exception<SamplingExhausted>(m, "SamplingExhausted", base.ptr());

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("__call__", [](Rng& r) { return r(); });

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init<>())
      .def_readwrite("particle_count", &ModelParams::particle_count)
      .def_readwrite("forgetting", &ModelParams::forgetting)
      .def_readwrite("process_variance", &ModelParams::process_variance)
      .def_readwrite("likelihood_sharpness", &ModelParams::likelihood_sharpness)
      .def_readwrite("vote_radius", &ModelParams::vote_radius)
      .def_readwrite("trust_threshold", &ModelParams::trust_threshold)
      .def_readwrite("resample", &ModelParams::resample)
      .def("validate", &ModelParams::validate)
      .def_static("reference", &ModelParams::reference);

  py::class_<TrustEstimate>(m, "TrustEstimate")
      .def(py::init<double>(), py::arg("value"))
      .def_property_readonly("value", &TrustEstimate::value)
      .def("__float__", &TrustEstimate::value)
      .def("__repr__", [](TrustEstimate t) { return "TrustEstimate(" + std::to_string(t.value()) + ")"; });

  py::class_<ParticleSet>(m, "ParticleSet")
      .def(py::init<std::vector<double>, std::vector<double>>(), py::arg("particles"), py::arg("weights"))
      .def_static("full_trust", &ParticleSet::full_trust, py::arg("n"))
      .def_property_readonly("particles", [](const ParticleSet& s) { return to_vector(s.particles()); })
      .def_property_readonly("weights", [](const ParticleSet& s) { return to_vector(s.weights()); })
      .def("mean", &ParticleSet::mean)
      .def("effective_sample_size", &ParticleSet::effective_sample_size)
      .def("__len__", &ParticleSet::size);

  py::class_<CommunityObservation>(m, "CommunityObservation")
      .def(py::init([](std::optional<double> center, std::vector<double> readings, std::vector<double> trusts) {
             return CommunityObservation{center, std::move(readings), std::move(trusts)};
           }),
           py::arg("center_reading"), py::arg("member_readings"), py::arg("member_trusts"))
      .def_readwrite("center_reading", &CommunityObservation::center_reading)
      .def_readwrite("member_readings", &CommunityObservation::member_readings)
      .def_readwrite("member_trusts", &CommunityObservation::member_trusts);

  py::class_<FilterOutput>(m, "FilterOutput")
      .def_readonly("particles", &FilterOutput::particles)
      .def_readonly("estimate", &FilterOutput::estimate)
      .def_readonly("resampled", &FilterOutput::resampled)
      .def_readonly("degenerate", &FilterOutput::degenerate);

  m.def("propagate_particle", &propagate_particle, py::arg("lambda_prev"), py::arg("params"), py::arg("rng"));
  m.def("vote", &vote, py::arg("member_reading"), py::arg("center_reading"), py::arg("params"));
  m.def("voting_average", &voting_average, py::arg("obs"), py::arg("params"));
  m.def("likelihood", &likelihood, py::arg("lam"), py::arg("voting_avg"), py::arg("params"));
  m.def("filter_step",
        py::overload_cast<const ParticleSet&, std::optional<double>, const ModelParams&, Rng&>(&filter_step),
        py::arg("state"), py::arg("voting_avg"), py::arg("params"), py::arg("rng"));
  m.def("filter_step",
        py::overload_cast<const ParticleSet&, const CommunityObservation&, const ModelParams&, Rng&>(&filter_step),
        py::arg("state"), py::arg("obs"), py::arg("params"), py::arg("rng"));

  py::class_<GridDensity>(m, "GridDensity")
      .def(py::init<std::vector<double>>(), py::arg("masses"))
      .def_static("uniform", &GridDensity::uniform, py::arg("points"))
      .def_static("point_mass", &GridDensity::point_mass, py::arg("points"), py::arg("at"))
      .def_property_readonly("masses", [](const GridDensity& d) { return to_vector(d.masses()); })
      .def("mean", &GridDensity::mean)
      .def("__len__", &GridDensity::size);

  py::class_<GridFilter>(m, "GridFilter")
      .def(py::init<const ModelParams&, std::size_t>(), py::arg("params"), py::arg("points"))
      .def("step", &GridFilter::step, py::arg("prior"), py::arg("voting_avg"));

  py::class_<SensingRange>(m, "SensingRange")
      .def(py::init([](double lo, double hi) { return SensingRange{lo, hi}; }), py::arg("x_min") = 15.0,
           py::arg("x_max") = 25.0)
      .def_readwrite("x_min", &SensingRange::x_min)
      .def_readwrite("x_max", &SensingRange::x_max)
      .def("contains", &SensingRange::contains);

  py::enum_<DecisionRule>(m, "DecisionRule")
      .value("TRUSTED_IN_RANGE", DecisionRule::kTrustedInRange)
      .value("TRUSTED_OUT_OF_RANGE", DecisionRule::kTrustedOutOfRange)
      .value("COMMUNITY_IN_RANGE", DecisionRule::kCommunityInRange)
      .value("COMMUNITY_OUT_OF_RANGE", DecisionRule::kCommunityOutOfRange);

  m.def("trusted_reading_estimate", &trusted_reading_estimate, py::arg("obs"));
  m.def("select_rule", &select_rule, py::arg("trust"), py::arg("obs"), py::arg("sensing_range"), py::arg("params"));
  m.def(
      "decide_event",
      [](TrustEstimate t, const CommunityObservation& o, const SensingRange& r, const ModelParams& p) {
        return to_int(decide_event(t, o, r, p));
      },
      py::arg("trust"), py::arg("obs"), py::arg("sensing_range"), py::arg("params"));

  py::class_<CusumParams>(m, "CusumParams")
      .def(py::init([](double ref, double drift, double h) { return CusumParams{ref, drift, h}; }),
           py::arg("reference") = 20.0, py::arg("drift") = 10.0, py::arg("threshold") = 1.0)
      .def_readwrite("reference", &CusumParams::reference)
      .def_readwrite("drift", &CusumParams::drift)
      .def_readwrite("threshold", &CusumParams::threshold);

  py::class_<CusumState>(m, "CusumState")
      .def(py::init<>())
      .def_readonly("s_plus", &CusumState::s_plus)
      .def_readonly("s_minus", &CusumState::s_minus)
      .def_readonly("alarmed", &CusumState::alarmed);

  m.def(
      "cusum_update",
      [](const CusumState& s, std::optional<double> x, const CusumParams& p) {
        auto [next, e] = cusum_update(s, x, p);
        return py::make_tuple(next, to_int(e));
      },
      py::arg("state"), py::arg("reading"), py::arg("params"));

  py::class_<StepMetrics>(m, "StepMetrics")
      .def_property_readonly("detector", [](const StepMetrics& s) { return detector_name(s.detector); })
      .def_readonly("step", &StepMetrics::step)
      .def_readonly("run", &StepMetrics::run)
      .def_readonly("misses", &StepMetrics::misses)
      .def_readonly("false_alarms", &StepMetrics::false_alarms)
      .def_readonly("total", &StepMetrics::total)
      .def_property_readonly("mdr", &StepMetrics::mdr)
      .def_property_readonly("far", &StepMetrics::far)
      .def_property_readonly("er", &StepMetrics::er);

  m.def(
      "compute_metrics",
      [](const std::vector<int>& e, const std::vector<int>& truth) {
        auto conv = [](const std::vector<int>& v) {
          std::vector<EventIndicator> out;
          for (int x : v) {
            if (x != 0 && x != 1) throw InvalidConfig("indicators must be 0 or 1");
            out.push_back(static_cast<EventIndicator>(x));
          }
          return out;
        };
        return compute_metrics(conv(e), conv(truth));
      },
      py::arg("indicators"), py::arg("truth"));

  py::class_<ScenarioConfig>(m, "Scenario")
      .def(py::init<>())
      .def_static(
          "from_json", [](const std::string& text) { return scenario_from_json(nlohmann::json::parse(text)); },
          py::arg("text"))
      .def("to_json", [](const ScenarioConfig& c) { return scenario_to_json(c).dump(); })
      .def("validate", &ScenarioConfig::validate)
      .def_readwrite("horizon", &ScenarioConfig::horizon)
      .def_readwrite("failure_rate", &ScenarioConfig::failure_rate)
      .def_readwrite("master_seed", &ScenarioConfig::master_seed)
      .def_readwrite("model", &ScenarioConfig::model)
      .def_readwrite("cusum", &ScenarioConfig::cusum);

  m.def("load_scenario", &load_scenario, py::arg("path"));

  py::class_<RunRecord>(m, "RunRecord")
      .def_readonly("run", &RunRecord::run)
      .def_readonly("seed", &RunRecord::seed)
      .def_readonly("metrics", &RunRecord::metrics)
      .def("trace_csv", [](const RunRecord& r) { return csv(write_trace_csv, r); })
      .def("metrics_csv", [](const RunRecord& r) {
        return csv([](std::ostream& o, const std::vector<StepMetrics>& v) { write_metrics_csv(o, v); }, r.metrics);
      });

  m.def("run_seed", &run_seed, py::arg("master_seed"), py::arg("run"));
  m.def("run_scenario", &run_scenario, py::arg("config"), py::arg("seed"), py::arg("run") = 0,
        py::call_guard<py::gil_scoped_release>());

  py::class_<SummaryRow>(m, "SummaryRow")
      .def_property_readonly("detector", [](const SummaryRow& s) { return detector_name(s.detector); })
      .def_readonly("step", &SummaryRow::step)
      .def_readonly("runs", &SummaryRow::runs)
      .def_readonly("mean_mdr", &SummaryRow::mean_mdr)
      .def_readonly("mean_far", &SummaryRow::mean_far)
      .def_readonly("mean_er", &SummaryRow::mean_er)
      .def_readonly("std_mdr", &SummaryRow::std_mdr)
      .def_readonly("std_far", &SummaryRow::std_far)
      .def_readonly("std_er", &SummaryRow::std_er);

  py::class_<MonteCarloResult>(m, "MonteCarloResult")
      .def_readonly("seeds", &MonteCarloResult::seeds)
      .def_readonly("per_run", &MonteCarloResult::per_run)
      .def_readonly("summary", &MonteCarloResult::summary)
      .def("summary_csv", [](const MonteCarloResult& r) { return csv(write_summary_csv, r); });

  m.def("monte_carlo", &monte_carlo, py::arg("config"), py::arg("runs"), py::call_guard<py::gil_scoped_release>());

  py::class_<SweepRow>(m, "SweepRow")
      .def_readonly("rate", &SweepRow::rate)
      .def_property_readonly("detector", [](const SweepRow& s) { return detector_name(s.detector); })
      .def_readonly("step", &SweepRow::step)
      .def_readonly("runs", &SweepRow::runs)
      .def_readonly("mean_mdr", &SweepRow::mean_mdr)
      .def_readonly("mean_far", &SweepRow::mean_far)
      .def_readonly("mean_er", &SweepRow::mean_er)
      .def_readonly("std_er", &SweepRow::std_er)
      .def_readonly("stderr_er", &SweepRow::stderr_er);

  m.def(
      "sweep_failure_rate",
      [](const ScenarioConfig& c, const std::vector<double>& rates, int runs, int step) {
        return sweep_failure_rate(c, rates, runs, step);
      },
      py::arg("config"), py::arg("rates"), py::arg("runs"), py::arg("step") = 3,
      py::call_guard<py::gil_scoped_release>());
}
