#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <variant>
#include <vector>

#include "btm/baselines.hpp"
#include "btm/detection.hpp"
#include "btm/random.hpp"
#include "btm/trust_filter.hpp"

namespace btm {

struct Position {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Position&, const Position&) = default;
};

double distance(const Position& a, const Position& b) noexcept;

// Fault models. Each transforms the healthy reading once the fault is active.
struct OffsetFault {
  double offset = 20.0;  ///< x_f = x + m
};
struct StuckAtFault {
  double value = 0.0;  ///< x_f = s
};
struct VarianceDegradationFault {
  double variance = 4.0;  ///< x_f = x + N(0, q)
};
struct SleeperFault {};  ///< no reading at all

using FaultKind =
    std::variant<OffsetFault, StuckAtFault, VarianceDegradationFault, SleeperFault>;

struct FaultSpec {
  FaultKind kind;
  int onset_step = 1;

  bool active_at(int k) const noexcept { return k >= onset_step; }
};

const char* fault_name(const FaultKind& kind) noexcept;

/// Regular lattice of node positions, row by row from `origin`.
struct GridLayout {
  int columns = 10;
  int rows = 10;
  double spacing = 1.0;
  Position origin{1.0, 1.0};
};

using NodeLayout = std::variant<GridLayout, std::vector<Position>>;

/// Disk-shaped event region around a fixed epicenter.
struct EventDynamics {
  Position epicenter{5.5, 5.5};
  /// rho_k for k = 1, 2, ...; steps past the end reuse the last radius.
  std::vector<double> radius_schedule{1.4, 1.85, 2.3, 2.75, 3.2};

  double radius_at(int k) const;
};

struct ReadingPatterns {
  double non_event_mean = 20.0;
  double event_mean = 40.0;
  double noise_std = 1.0;
};

/// Relative weights for drawing the kind of each faulty node.
struct FaultMix {
  double offset = 1.0;
  double stuck_at = 1.0;
  double variance_degradation = 1.0;
  double sleeper = 1.0;
};

/// Magnitudes used for randomly assigned faults.
struct FaultDefaults {
  double offset = 20.0;
  double stuck_at = 0.0;
  double variance_degradation = 4.0;
  int onset_step = 1;
};

struct ScenarioConfig {
  Position field_size{10.0, 10.0};
  NodeLayout layout = GridLayout{};
  double comm_radius = 1.5;
  int horizon = 5;
  EventDynamics event;
  ReadingPatterns patterns;
  double failure_rate = 0.10;
  FaultMix fault_mix;
  FaultDefaults fault_defaults;
  /// Explicit faults by node id. When non-empty it replaces random assignment.
  std::map<int, FaultSpec> fault_plan;
  std::uint64_t master_seed = 1;
  ModelParams model;
  SensingRange sensing_range;
  CusumParams cusum;

  /// Throws InvalidConfig on any violated constraint.
  void validate() const;
};

struct Node {
  int id = 0;
  Position position;
  std::vector<int> community;
  ParticleSet filter_state = ParticleSet::full_trust(1);
  TrustEstimate last_trust;
  std::optional<FaultSpec> fault;
  CusumState cusum;
  EventIndicator last_indicator = EventIndicator::kNonEvent;
  EventIndicator last_cusum_indicator = EventIndicator::kNonEvent;
};

/// Node positions and communities (all other nodes within comm_radius).
/// Throws InvalidConfig if any community is empty.
std::vector<Node> build_topology(const ScenarioConfig& config);

bool event_membership(const Node& node, int k, const EventDynamics& dyn);

/// Healthy pattern plus Gaussian noise, then the node's fault transform if active.
std::optional<double> generate_reading(const Node& node, int k, const ScenarioConfig& config,
                                       Rng& rng);

/// Picks round(p * n) distinct nodes uniformly and draws a fault kind for each.
std::map<int, FaultSpec> assign_faults(const ScenarioConfig& config, std::size_t node_count,
                                       Rng& rng);

/// Everything that happened at one node in one step.
struct NodeStepRecord {
  int node_id = 0;
  EventIndicator truth = EventIndicator::kNonEvent;
  bool faulty = false;
  std::optional<double> reading;
  TrustEstimate trust;
  EventIndicator btm = EventIndicator::kNonEvent;
  EventIndicator cusum = EventIndicator::kNonEvent;
  std::optional<DecisionRule> rule;  ///< empty when the previous indicator was held
  bool filter_degenerate = false;
  double weight_sum = 1.0;  ///< sum of the node's particle weights after the step
};

/// Two-phase synchronous update of every node for step k.
///
/// Phase 1 runs each node's filter on an observation whose member trusts are
/// the step k-1 estimates. Phase 2 decides each indicator with the fresh
/// phase-1 member trusts. Randomness comes from per-(node, step) streams
/// derived from `run_seed`, so results do not depend on visiting order.
/// A node whose filter or decision raises keeps its previous state and
/// indicator; the other nodes are unaffected.
std::vector<NodeStepRecord> step_network(std::vector<Node>& nodes, int k,
                                         const ScenarioConfig& config, std::uint64_t run_seed);

/// Nodes of one scenario run, with faults assigned and filters initialized.
class Network {
 public:
  Network(const ScenarioConfig& config, std::uint64_t run_seed);

  /// Advances to the next step and returns its records.
  std::vector<NodeStepRecord> step();

  int current_step() const noexcept { return step_; }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const ScenarioConfig& config() const noexcept { return config_; }

 private:
  ScenarioConfig config_;
  std::uint64_t run_seed_;
  std::vector<Node> nodes_;
  int step_ = 0;
};

}  // namespace btm
