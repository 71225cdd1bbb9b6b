#include "btm/simnet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "btm/errors.hpp"

namespace btm {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::vector<Position> layout_positions(const NodeLayout& layout) {
  return std::visit(
      Overloaded{
          [](const GridLayout& g) {
            std::vector<Position> out;
            out.reserve(static_cast<std::size_t>(g.columns * g.rows));
            for (int row = 0; row < g.rows; ++row) {
              for (int col = 0; col < g.columns; ++col) {
                out.push_back({g.origin.x + col * g.spacing, g.origin.y + row * g.spacing});
              }
            }
            return out;
          },
          [](const std::vector<Position>& explicit_positions) { return explicit_positions; },
      },
      layout);
}

}  // namespace

double distance(const Position& a, const Position& b) noexcept {
  return std::hypot(a.x - b.x, a.y - b.y);
}

const char* fault_name(const FaultKind& kind) noexcept {
  return std::visit(Overloaded{
                        [](const OffsetFault&) { return "offset"; },
                        [](const StuckAtFault&) { return "stuck_at"; },
                        [](const VarianceDegradationFault&) { return "variance_degradation"; },
                        [](const SleeperFault&) { return "sleeper"; },
                    },
                    kind);
}

double EventDynamics::radius_at(int k) const {
  if (radius_schedule.empty()) throw InvalidConfig("event radius schedule is empty");
  const auto idx = static_cast<std::size_t>(std::clamp(k, 1, static_cast<int>(radius_schedule.size())));
  return radius_schedule[idx - 1];
}

void ScenarioConfig::validate() const {
  auto fail = [](const std::string& what) { throw InvalidConfig("scenario: " + what); };
  model.validate();
  sensing_range.validate();
  cusum.validate();
  if (!(field_size.x > 0.0 && field_size.y > 0.0)) fail("field_size must be positive");
  if (const auto* g = std::get_if<GridLayout>(&layout)) {
    if (g->columns < 1 || g->rows < 1) fail("grid layout needs at least one row and column");
    if (!(g->spacing > 0.0)) fail("grid spacing must be > 0");
  } else if (std::get<std::vector<Position>>(layout).empty()) {
    fail("explicit layout has no positions");
  }
  if (!(comm_radius > 0.0)) fail("comm_radius must be > 0");
  if (horizon < 1) fail("horizon must be >= 1");
  if (event.radius_schedule.empty()) fail("event radius_schedule is empty");
  for (double rho : event.radius_schedule) {
    if (!(rho >= 0.0)) fail("event radius must be >= 0");
  }
  if (!(patterns.noise_std > 0.0)) fail("noise_std must be > 0");
  if (!(std::abs(patterns.event_mean - patterns.non_event_mean) > 2.0 * model.vote_radius)) {
    fail("event and non-event means must differ by more than 2 * vote_radius");
  }
  if (!(failure_rate >= 0.0 && failure_rate <= 1.0)) fail("failure_rate must be in [0,1]");
  const double mix_total =
      fault_mix.offset + fault_mix.stuck_at + fault_mix.variance_degradation + fault_mix.sleeper;
  if (fault_mix.offset < 0 || fault_mix.stuck_at < 0 || fault_mix.variance_degradation < 0 ||
      fault_mix.sleeper < 0 || !(mix_total > 0.0)) {
    fail("fault_mix weights must be nonnegative with a positive sum");
  }
  if (!(fault_defaults.variance_degradation > 0.0)) fail("variance degradation must be > 0");
  if (fault_defaults.onset_step < 1) fail("fault onset_step must be >= 1");
  const auto n = static_cast<int>(layout_positions(layout).size());
  for (const auto& [id, spec] : fault_plan) {
    if (id < 0 || id >= n) fail("fault_plan references unknown node " + std::to_string(id));
    if (spec.onset_step < 1) fail("fault onset_step must be >= 1");
    if (const auto* v = std::get_if<VarianceDegradationFault>(&spec.kind); v && !(v->variance > 0)) {
      fail("variance degradation must be > 0");
    }
  }
}

std::vector<Node> build_topology(const ScenarioConfig& config) {
  const auto positions = layout_positions(config.layout);
  std::vector<Node> nodes(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    nodes[i].id = static_cast<int>(i);
    nodes[i].position = positions[i];
    nodes[i].filter_state = ParticleSet::full_trust(config.model.particle_count);
  }
  for (auto& node : nodes) {
    for (const auto& other : nodes) {
      if (other.id != node.id && distance(node.position, other.position) <= config.comm_radius) {
        node.community.push_back(other.id);
      }
    }
    if (node.community.empty()) {
      throw InvalidConfig("node " + std::to_string(node.id) + " has an empty community");
    }
  }
  return nodes;
}

bool event_membership(const Node& node, int k, const EventDynamics& dyn) {
  return distance(node.position, dyn.epicenter) <= dyn.radius_at(k);
}

std::optional<double> generate_reading(const Node& node, int k, const ScenarioConfig& config,
                                       Rng& rng) {
  const auto& pat = config.patterns;
  std::normal_distribution<double> noise(0.0, pat.noise_std);
  const double base =
      (event_membership(node, k, config.event) ? pat.event_mean : pat.non_event_mean) + noise(rng);
  if (!node.fault || !node.fault->active_at(k)) return base;
  return std::visit(Overloaded{
                        [&](const OffsetFault& f) -> std::optional<double> { return base + f.offset; },
                        [&](const StuckAtFault& f) -> std::optional<double> { return f.value; },
                        [&](const VarianceDegradationFault& f) -> std::optional<double> {
                          std::normal_distribution<double> extra(0.0, std::sqrt(f.variance));
                          return base + extra(rng);
                        },
                        [&](const SleeperFault&) -> std::optional<double> { return std::nullopt; },
                    },
                    node.fault->kind);
}

std::map<int, FaultSpec> assign_faults(const ScenarioConfig& config, std::size_t node_count,
                                       Rng& rng) {
  if (!config.fault_plan.empty()) return config.fault_plan;
  std::vector<int> order(node_count);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  // Kinds are drawn for the whole permutation so that raising p only adds
  // faulty nodes on top of the ones chosen at a lower rate.
  const auto& mix = config.fault_mix;
  std::discrete_distribution<int> pick(
      {mix.offset, mix.stuck_at, mix.variance_degradation, mix.sleeper});
  std::vector<int> kinds(node_count);
  for (auto& kind : kinds) kind = pick(rng);

  const auto count = static_cast<std::size_t>(
      std::llround(config.failure_rate * static_cast<double>(node_count)));
  const auto& d = config.fault_defaults;
  std::map<int, FaultSpec> faults;
  for (std::size_t i = 0; i < std::min(count, node_count); ++i) {
    FaultKind kind;
    switch (kinds[i]) {
      case 0: kind = OffsetFault{d.offset}; break;
      case 1: kind = StuckAtFault{d.stuck_at}; break;
      case 2: kind = VarianceDegradationFault{d.variance_degradation}; break;
      default: kind = SleeperFault{}; break;
    }
    faults.emplace(order[i], FaultSpec{kind, d.onset_step});
  }
  return faults;
}

std::vector<NodeStepRecord> step_network(std::vector<Node>& nodes, int k,
                                         const ScenarioConfig& config, std::uint64_t run_seed) {
  const std::size_t n = nodes.size();
  const auto uk = static_cast<std::uint64_t>(k);
  std::vector<NodeStepRecord> records(n);

  std::vector<std::optional<double>> readings(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = make_rng(run_seed, {static_cast<std::uint64_t>(Stream::kReading), i, uk});
    readings[i] = generate_reading(nodes[i], k, config, rng);
  }

  auto observe = [&](const Node& node, auto&& trust_of) {
    CommunityObservation obs;
    obs.center_reading = readings[static_cast<std::size_t>(node.id)];
    for (int member : node.community) {
      const auto m = static_cast<std::size_t>(member);
      if (!readings[m]) continue;
      obs.member_readings.push_back(*readings[m]);
      obs.member_trusts.push_back(trust_of(m));
    }
    return obs;
  };

  // Phase 1: trust estimates from the previous step's member trusts.
  std::vector<ParticleSet> next_state;
  next_state.reserve(n);
  std::vector<TrustEstimate> fresh(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto obs = observe(nodes[i], [&](std::size_t m) { return nodes[m].last_trust.value(); });
    auto rng = make_rng(run_seed, {static_cast<std::uint64_t>(Stream::kFilter), i, uk});
    try {
      auto out = filter_step(nodes[i].filter_state, obs, config.model, rng);
      records[i].filter_degenerate = out.degenerate;
      next_state.push_back(std::move(out.particles));
      fresh[i] = out.estimate;
    } catch (const Error&) {
      next_state.push_back(nodes[i].filter_state);
      fresh[i] = nodes[i].last_trust;
    }
  }

  // Phase 2: indicators with the fresh member trusts.
  for (std::size_t i = 0; i < n; ++i) {
    auto& node = nodes[i];
    auto& rec = records[i];
    rec.node_id = node.id;
    rec.truth = event_membership(node, k, config.event) ? EventIndicator::kEvent
                                                        : EventIndicator::kNonEvent;
    rec.faulty = node.fault.has_value() && node.fault->active_at(k);
    rec.reading = readings[i];
    rec.trust = fresh[i];

    const auto obs = observe(node, [&](std::size_t m) { return fresh[m].value(); });
    try {
      const auto rule = select_rule(fresh[i], obs, config.sensing_range, config.model);
      rec.rule = rule;
      rec.btm = indicator_for(rule);
    } catch (const Error&) {
      rec.btm = node.last_indicator;
    }

    auto [cusum_state, cusum_e] = cusum_update(node.cusum, readings[i], config.cusum);
    rec.cusum = cusum_e;

    node.filter_state = std::move(next_state[i]);
    const auto w = node.filter_state.weights();
    rec.weight_sum = std::accumulate(w.begin(), w.end(), 0.0);
    node.last_trust = fresh[i];
    node.last_indicator = rec.btm;
    node.cusum = cusum_state;
    node.last_cusum_indicator = cusum_e;
  }
  return records;
}

Network::Network(const ScenarioConfig& config, std::uint64_t run_seed)
    : config_(config), run_seed_(run_seed) {
  config_.validate();
  nodes_ = build_topology(config_);
  auto rng = make_rng(run_seed_, {static_cast<std::uint64_t>(Stream::kFaults)});
  for (auto& [id, spec] : assign_faults(config_, nodes_.size(), rng)) {
    nodes_[static_cast<std::size_t>(id)].fault = spec;
  }
}

std::vector<NodeStepRecord> Network::step() {
  ++step_;
  return step_network(nodes_, step_, config_, run_seed_);
}

}  // namespace btm
