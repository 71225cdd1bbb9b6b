#include "btm/scenario_io.hpp"

#include <fstream>
#include <initializer_list>
#include <set>

#include "btm/errors.hpp"

namespace btm {

using nlohmann::json;

namespace {

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw InvalidConfig(where + ": expected an object");
}

void reject_unknown(const json& j, const std::string& where,
                    std::initializer_list<const char*> allowed) {
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items()) {
    if (!keys.contains(key)) throw InvalidConfig(where + ": unknown key '" + key + "'");
  }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InvalidConfig(where + "." + key + ": " + e.what());
  }
}

Position read_position(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw InvalidConfig(where + ": expected [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

json position_json(const Position& p) { return json::array({p.x, p.y}); }

FaultKind read_fault_kind(const std::string& kind, const json& j, const std::string& where) {
  const bool has_value = j.contains("value");
  auto value = [&]() {
    if (!has_value || !j.at("value").is_number()) {
      throw InvalidConfig(where + ": fault kind '" + kind + "' needs a numeric 'value'");
    }
    return j.at("value").get<double>();
  };
  if (kind == "offset") return OffsetFault{value()};
  if (kind == "stuck_at") return StuckAtFault{value()};
  if (kind == "variance_degradation") return VarianceDegradationFault{value()};
  if (kind == "sleeper") return SleeperFault{};
  throw InvalidConfig(where + ": unknown fault kind '" + kind + "'");
}

json fault_json(int node, const FaultSpec& spec) {
  json j{{"node", node}, {"kind", fault_name(spec.kind)}, {"onset_step", spec.onset_step}};
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, OffsetFault>) j["value"] = f.offset;
        if constexpr (std::is_same_v<T, StuckAtFault>) j["value"] = f.value;
        if constexpr (std::is_same_v<T, VarianceDegradationFault>) j["value"] = f.variance;
      },
      spec.kind);
  return j;
}

}  // namespace

ScenarioConfig scenario_from_json(const json& j) {
  ScenarioConfig c;
  require_object(j, "scenario");
  reject_unknown(j, "scenario",
                 {"field_size", "layout", "comm_radius", "horizon", "event", "patterns",
                  "failure_rate", "fault_mix", "fault_defaults", "fault_plan", "master_seed",
                  "model", "sensing_range", "cusum"});

  if (j.contains("field_size")) c.field_size = read_position(j["field_size"], "field_size");

  if (j.contains("layout")) {
    const auto& l = j["layout"];
    require_object(l, "layout");
    reject_unknown(l, "layout", {"grid", "positions"});
    if (l.contains("grid") == l.contains("positions")) {
      throw InvalidConfig("layout: give exactly one of 'grid' or 'positions'");
    }
    if (l.contains("grid")) {
      const auto& g = l["grid"];
      require_object(g, "layout.grid");
      reject_unknown(g, "layout.grid", {"columns", "rows", "spacing", "origin"});
      GridLayout grid;
      read(g, "columns", grid.columns, "layout.grid");
      read(g, "rows", grid.rows, "layout.grid");
      read(g, "spacing", grid.spacing, "layout.grid");
      if (g.contains("origin")) grid.origin = read_position(g["origin"], "layout.grid.origin");
      c.layout = grid;
    } else {
      const auto& p = l["positions"];
      if (!p.is_array()) throw InvalidConfig("layout.positions: expected an array");
      std::vector<Position> positions;
      for (const auto& e : p) positions.push_back(read_position(e, "layout.positions"));
      c.layout = std::move(positions);
    }
  }

  read(j, "comm_radius", c.comm_radius, "scenario");
  read(j, "horizon", c.horizon, "scenario");

  if (j.contains("event")) {
    const auto& e = j["event"];
    require_object(e, "event");
    reject_unknown(e, "event", {"epicenter", "radius_schedule"});
    if (e.contains("epicenter")) c.event.epicenter = read_position(e["epicenter"], "event.epicenter");
    read(e, "radius_schedule", c.event.radius_schedule, "event");
  }

  if (j.contains("patterns")) {
    const auto& p = j["patterns"];
    require_object(p, "patterns");
    reject_unknown(p, "patterns", {"non_event_mean", "event_mean", "noise_std"});
    read(p, "non_event_mean", c.patterns.non_event_mean, "patterns");
    read(p, "event_mean", c.patterns.event_mean, "patterns");
    read(p, "noise_std", c.patterns.noise_std, "patterns");
  }

  read(j, "failure_rate", c.failure_rate, "scenario");

  if (j.contains("fault_mix")) {
    const auto& m = j["fault_mix"];
    require_object(m, "fault_mix");
    reject_unknown(m, "fault_mix", {"offset", "stuck_at", "variance_degradation", "sleeper"});
    read(m, "offset", c.fault_mix.offset, "fault_mix");
    read(m, "stuck_at", c.fault_mix.stuck_at, "fault_mix");
    read(m, "variance_degradation", c.fault_mix.variance_degradation, "fault_mix");
    read(m, "sleeper", c.fault_mix.sleeper, "fault_mix");
  }

  if (j.contains("fault_defaults")) {
    const auto& d = j["fault_defaults"];
    require_object(d, "fault_defaults");
    reject_unknown(d, "fault_defaults", {"offset", "stuck_at", "variance_degradation", "onset_step"});
    read(d, "offset", c.fault_defaults.offset, "fault_defaults");
    read(d, "stuck_at", c.fault_defaults.stuck_at, "fault_defaults");
    read(d, "variance_degradation", c.fault_defaults.variance_degradation, "fault_defaults");
    read(d, "onset_step", c.fault_defaults.onset_step, "fault_defaults");
  }

  if (j.contains("fault_plan")) {
    const auto& plan = j["fault_plan"];
    if (!plan.is_array()) throw InvalidConfig("fault_plan: expected an array");
    for (const auto& f : plan) {
      require_object(f, "fault_plan[]");
      reject_unknown(f, "fault_plan[]", {"node", "kind", "value", "onset_step"});
      int node = -1;
      std::string kind;
      FaultSpec spec{SleeperFault{}, 1};
      if (!f.contains("node") || !f.contains("kind")) {
        throw InvalidConfig("fault_plan[]: 'node' and 'kind' are required");
      }
      read(f, "node", node, "fault_plan[]");
      read(f, "kind", kind, "fault_plan[]");
      read(f, "onset_step", spec.onset_step, "fault_plan[]");
      spec.kind = read_fault_kind(kind, f, "fault_plan[]");
      if (!c.fault_plan.emplace(node, spec).second) {
        throw InvalidConfig("fault_plan: node " + std::to_string(node) + " listed twice");
      }
    }
  }

  if (j.contains("master_seed")) {
    if (!j["master_seed"].is_number_unsigned()) {
      throw InvalidConfig("master_seed: expected a nonnegative integer");
    }
    c.master_seed = j["master_seed"].get<std::uint64_t>();
  }

  if (j.contains("model")) {
    const auto& m = j["model"];
    require_object(m, "model");
    reject_unknown(m, "model",
                   {"particle_count", "forgetting", "process_variance", "likelihood_sharpness",
                    "vote_radius", "trust_threshold", "resample"});
    if (m.contains("particle_count") && !m["particle_count"].is_number_unsigned()) {
      throw InvalidConfig("model.particle_count: expected a positive integer");
    }
    read(m, "particle_count", c.model.particle_count, "model");
    read(m, "forgetting", c.model.forgetting, "model");
    read(m, "process_variance", c.model.process_variance, "model");
    read(m, "likelihood_sharpness", c.model.likelihood_sharpness, "model");
    read(m, "vote_radius", c.model.vote_radius, "model");
    read(m, "trust_threshold", c.model.trust_threshold, "model");
    read(m, "resample", c.model.resample, "model");
  }

  if (j.contains("sensing_range")) {
    const auto r = read_position(j["sensing_range"], "sensing_range");
    c.sensing_range = SensingRange{r.x, r.y};
  }

  if (j.contains("cusum")) {
    const auto& s = j["cusum"];
    require_object(s, "cusum");
    reject_unknown(s, "cusum", {"reference", "drift", "threshold"});
    read(s, "reference", c.cusum.reference, "cusum");
    read(s, "drift", c.cusum.drift, "cusum");
    read(s, "threshold", c.cusum.threshold, "cusum");
  }

  c.validate();
  return c;
}

json scenario_to_json(const ScenarioConfig& c) {
  json layout;
  if (const auto* g = std::get_if<GridLayout>(&c.layout)) {
    layout["grid"] = {{"columns", g->columns},
                      {"rows", g->rows},
                      {"spacing", g->spacing},
                      {"origin", position_json(g->origin)}};
  } else {
    json positions = json::array();
    for (const auto& p : std::get<std::vector<Position>>(c.layout)) positions.push_back(position_json(p));
    layout["positions"] = positions;
  }
  json plan = json::array();
  for (const auto& [node, spec] : c.fault_plan) plan.push_back(fault_json(node, spec));

  return json{
      {"field_size", position_json(c.field_size)},
      {"layout", layout},
      {"comm_radius", c.comm_radius},
      {"horizon", c.horizon},
      {"event",
       {{"epicenter", position_json(c.event.epicenter)},
        {"radius_schedule", c.event.radius_schedule}}},
      {"patterns",
       {{"non_event_mean", c.patterns.non_event_mean},
        {"event_mean", c.patterns.event_mean},
        {"noise_std", c.patterns.noise_std}}},
      {"failure_rate", c.failure_rate},
      {"fault_mix",
       {{"offset", c.fault_mix.offset},
        {"stuck_at", c.fault_mix.stuck_at},
        {"variance_degradation", c.fault_mix.variance_degradation},
        {"sleeper", c.fault_mix.sleeper}}},
      {"fault_defaults",
       {{"offset", c.fault_defaults.offset},
        {"stuck_at", c.fault_defaults.stuck_at},
        {"variance_degradation", c.fault_defaults.variance_degradation},
        {"onset_step", c.fault_defaults.onset_step}}},
      {"fault_plan", plan},
      {"master_seed", c.master_seed},
      {"model",
       {{"particle_count", c.model.particle_count},
        {"forgetting", c.model.forgetting},
        {"process_variance", c.model.process_variance},
        {"likelihood_sharpness", c.model.likelihood_sharpness},
        {"vote_radius", c.model.vote_radius},
        {"trust_threshold", c.model.trust_threshold},
        {"resample", c.model.resample}}},
      {"sensing_range", json::array({c.sensing_range.x_min, c.sensing_range.x_max})},
      {"cusum",
       {{"reference", c.cusum.reference},
        {"drift", c.cusum.drift},
        {"threshold", c.cusum.threshold}}},
  };
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open scenario file: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw InvalidConfig("scenario file " + path.string() + ": " + e.what());
  }
  return scenario_from_json(j);
}

}  // namespace btm
