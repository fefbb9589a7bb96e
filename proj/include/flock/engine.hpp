#pragma once

#include "flock/control.hpp"
#include "flock/dynamics.hpp"
#include "flock/environment.hpp"
#include "flock/qp.hpp"
#include "flock/safety.hpp"
#include "flock/topology.hpp"

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace flock {

enum class GraphMode { fixed, proximity };

/// `qp` runs every agent through its safety QP on the extended dynamics;
/// `none` applies the nominal (v, omega) directly to the unicycle.
enum class SafetyFilter { qp, none };

enum class Execution { serial, openmp };

struct InputLimits {
  double v_floor{kDefaultVFloor};
  double v_max{10.0};
  double omega_min{-50.0};
  double omega_max{50.0};
};

struct AgentInit {
  Vec2 position{Vec2::Zero()};
  /// Radians.
  double theta{0.0};
  double v0{0.1};
};

struct ScenarioConfig {
  ScalarField field;
  std::vector<Obstacle> obstacles;
  std::vector<AgentInit> agents;
  GraphMode graph_mode{GraphMode::proximity};
  /// Edge list for GraphMode::fixed.
  std::vector<std::pair<std::size_t, std::size_t>> fixed_edges;
  FlockingLaw controller{FlockingLaw::unconstrained};
  SafetyFilter filter{SafetyFilter::qp};
  ControlGains gains;
  SafetyParams safety;
  InputLimits limits;
  /// Reference value for every relaxation weight gamma_ij.
  double gamma_ref{1.0};
  double dt{0.01};
  double t_end{30.0};
};

/// One line per violated invariant; empty when the scenario is valid.
std::vector<std::string> validate_scenario(const ScenarioConfig& cfg);

/// Number of integration steps on the dt grid (the log has one more row).
std::size_t step_count(const ScenarioConfig& cfg);

/// Pair barrier shape implied by the graph mode.
PairBarrier pair_barrier_kind(GraphMode mode);

struct AgentRecord {
  AgentState pose;
  /// Speed applied over the previous step (v0 at t = 0).
  double v{0.0};
};

struct World {
  std::size_t step{0};
  double t{0.0};
  std::vector<AgentRecord> agents;
};

enum class QpOutcome : std::uint8_t { skipped, optimal, fallback };

struct EdgeSample {
  std::size_t i{0};
  std::size_t j{0};
  double mu{0.0};
  double h{0.0};
  /// Relaxation weight chosen by agent i; NaN without a QP.
  double gamma{std::numeric_limits<double>::quiet_NaN()};
};

struct AgentSample {
  double x{0.0};
  double y{0.0};
  double theta{0.0};
  double v{0.0};
  double a_applied{0.0};
  double omega_applied{0.0};
  double v_nominal{0.0};
  double omega_nominal{0.0};
  /// e_i (unconstrained law) or ||e_vec_i|| (constrained law); NaN for the
  /// leader and for fragmented followers.
  double e_flock{std::numeric_limits<double>::quiet_NaN()};
  /// Obstacle barrier value; +inf without obstacles.
  double h_obstacle{std::numeric_limits<double>::infinity()};
  /// mu_i or ||mu_vec_i||; NaN for the leader.
  double mu_flock{std::numeric_limits<double>::quiet_NaN()};
  /// Direction of the gradient difference; NaN when undefined.
  double beta{std::numeric_limits<double>::quiet_NaN()};
  QpOutcome qp{QpOutcome::skipped};
  bool v_clamped{false};
};

struct StepRecord {
  double t{0.0};
  std::vector<AgentSample> agents;
  /// Ordered pairs (i, j) for every j adjacent to i.
  std::vector<EdgeSample> edges;
  bool connected{true};
  double v_source{0.0};
  double v_flock{0.0};
};

struct SimulationLog {
  ScalarField field;
  std::vector<Obstacle> obstacles;
  std::size_t leader{0};
  double dt{0.0};
  std::vector<StepRecord> steps;

  std::size_t fallback_count() const;
};

/// Everything one agent may use when deciding its input: its own state and
/// sensors, and the reports broadcast by its current neighbors.
struct LocalView {
  std::size_t id{0};
  bool is_leader{false};
  AgentRecord self;
  std::span<const NeighborReport> neighbors;
};

/// Static per-run settings shared by all agents. The field and obstacle list
/// stand in for each agent's on-board gradient and range sensors.
struct AgentContext {
  const ScalarField* field{nullptr};
  std::span<const Obstacle> obstacles;
  FlockingLaw law{FlockingLaw::unconstrained};
  SafetyFilter filter{SafetyFilter::qp};
  PairBarrier pair_kind{PairBarrier::connectivity};
  ControlGains gains;
  SafetyParams safety;
  InputLimits limits;
  double gamma_ref{1.0};
  double dt{0.01};
};

struct AgentDecision {
  KinematicInput nominal;
  /// Extended input; in kinematic mode `a` is the implied acceleration.
  ExtendedInput applied;
  /// Speed commanded for kinematic mode.
  double v_command{0.0};
  QpOutcome qp{QpOutcome::skipped};
  bool fragmented{false};
  double e_flock{std::numeric_limits<double>::quiet_NaN()};
  double mu_flock{std::numeric_limits<double>::quiet_NaN()};
  double beta{std::numeric_limits<double>::quiet_NaN()};
  Vec2 e_vec{Vec2::Constant(std::numeric_limits<double>::quiet_NaN())};
  double h_obstacle{std::numeric_limits<double>::infinity()};
  std::vector<EdgeSample> edges;
};

NeighborReport make_report(std::size_t id, const AgentRecord& agent, const ScalarField& field);

/// Nominal law, safety QP and diagnostics for one agent.
AgentDecision decide_agent(const LocalView& view, const AgentContext& ctx);

/// Advances one agent over dt with its decision.
AgentRecord integrate_agent(const AgentRecord& agent, const AgentDecision& decision, const AgentContext& ctx,
                            bool* v_clamped = nullptr);

/// Stepping engine. The serial path is the reference; the OpenMP path must
/// produce bit-identical results.
class Engine {
public:
  /// Throws std::invalid_argument with all violations if cfg is invalid.
  explicit Engine(ScenarioConfig cfg);

  const ScenarioConfig& config() const { return cfg_; }
  const LeaderAssignment& assignment() const { return assignment_; }
  const World& world() const { return world_; }

  /// Decides for every agent against the current snapshot, records the step,
  /// then integrates all agents together unless `advance` is false.
  StepRecord step(Execution exec, bool advance = true);

  /// Graph for the current snapshot.
  Graph current_graph(Execution exec) const;

private:
  AgentContext context() const;

  ScenarioConfig cfg_;
  LeaderAssignment assignment_;
  Graph fixed_graph_;
  World world_;
};

/// Runs t in [0, t_end] on the dt grid; the log holds step_count + 1 rows.
SimulationLog simulate(const ScenarioConfig& cfg, Execution exec = Execution::openmp);

/// Flocking Lyapunov value for one step record: 1/2 sum e_i^2 for the
/// unconstrained law, 1/2 sum (||e_vec_i||^2 + cos^2 + sin^2) otherwise.
double flocking_lyapunov(const StepRecord& rec, FlockingLaw law, std::size_t leader);

struct MetricsReport {
  double leader_final_distance{0.0};
  double max_abs_error_final{0.0};
  /// +inf without obstacles.
  double min_obstacle_clearance{std::numeric_limits<double>::infinity()};
  double min_h_obstacle{std::numeric_limits<double>::infinity()};
  double min_edge_mu{std::numeric_limits<double>::infinity()};
  double max_edge_mu{0.0};
  double min_edge_h{std::numeric_limits<double>::infinity()};
  double connected_fraction{1.0};
  std::size_t fallback_count{0};
  std::size_t steps{0};
};

/// Throws std::invalid_argument on an empty log.
MetricsReport compute_metrics(const SimulationLog& log);

/// `key = value` lines, doubles at full precision.
std::string metrics_text(const MetricsReport& m);

}  // namespace flock
