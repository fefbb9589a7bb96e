#include "flock/engine.hpp"
#include "flock/scenario.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

using namespace flock;

namespace {

ScenarioConfig bundled(const std::string& name) {
  return load_scenario(std::string(FLOCK_SOURCE_DIR) + "/scenarios/" + name);
}

AgentContext context_for(const ScenarioConfig& cfg) {
  AgentContext ctx;
  ctx.field = &cfg.field;
  ctx.obstacles = cfg.obstacles;
  ctx.law = cfg.controller;
  ctx.filter = cfg.filter;
  ctx.pair_kind = pair_barrier_kind(cfg.graph_mode);
  ctx.gains = cfg.gains;
  ctx.safety = cfg.safety;
  ctx.limits = cfg.limits;
  ctx.gamma_ref = cfg.gamma_ref;
  ctx.dt = cfg.dt;
  return ctx;
}

oracle::Vec5 extended_of(const AgentRecord& a) {
  return oracle::extended(a.pose.x, a.pose.y, a.v, a.pose.theta);
}

bool has_problem(const ScenarioConfig& cfg, const std::string& needle) {
  const auto problems = validate_scenario(cfg);
  return std::any_of(problems.begin(), problems.end(),
                     [&](const std::string& p) { return p.find(needle) != std::string::npos; });
}

ScenarioConfig pair_config() {
  ScenarioConfig cfg;
  cfg.graph_mode = GraphMode::proximity;
  cfg.agents = {{{1.0, 0.0}, std::numbers::pi, 1.0}, {{1.8, 0.3}, 0.4, 1.0}};
  return cfg;
}

}  // namespace

TEST_CASE("slack constraints leave the nominal input untouched") {
  ScenarioConfig cfg;
  cfg.obstacles = {{{-5.0, 4.0}, 0.5}};
  cfg.safety.kappa = 100.0;
  const AgentContext ctx = context_for(cfg);
  const AgentRecord self{{3.0, 0.0, std::numbers::pi - 0.3}, 2.0};
  const AgentDecision d = decide_agent({0, true, self, {}}, ctx);
  REQUIRE(d.qp == QpOutcome::optimal);
  const double a_ref = (d.nominal.v - self.v) / cfg.dt;
  CHECK(std::abs(d.applied.a - a_ref) < 1e-9);
  CHECK(std::abs(d.applied.omega - d.nominal.omega) < 1e-9);
  CHECK(d.nominal.omega != 0.0);
}

TEST_CASE("leader heading into an obstacle is filtered") {
  ScenarioConfig cfg;
  cfg.obstacles = {{{2.2, 0.05}, 0.4}};
  const AgentContext ctx = context_for(cfg);
  AgentRecord self{{3.0, 0.0, std::numbers::pi}, 3.0};
  const AgentDecision d = decide_agent({0, true, self, {}}, ctx);
  REQUIRE(d.qp == QpOutcome::optimal);
  const double a_ref = (d.nominal.v - self.v) / cfg.dt;
  CHECK(std::hypot(d.applied.a - a_ref, d.applied.omega - d.nominal.omega) > 1e-3);

  const ExtendedState xi = to_extended(self.pose, self.v);
  const auto b = obstacle_barrier(xi, cfg.obstacles, cfg.safety);
  REQUIRE(b);
  CHECK(b->lie.lg.dot(Eigen::Vector2d(d.applied.a, d.applied.omega)) + b->constraint.offset >= -1e-9);

  for (int k = 0; k < 300; ++k) {
    const AgentDecision dk = decide_agent({0, true, self, {}}, ctx);
    REQUIRE(dk.qp == QpOutcome::optimal);
    self = integrate_agent(self, dk, ctx);
    const double h = oracle::obstacle_h(extended_of(self), cfg.obstacles[0].center, cfg.obstacles[0].radius,
                                        cfg.safety.d1, cfg.safety.d2);
    CHECK(h >= 0.0);
  }
}

TEST_CASE("pair barrier decays no faster than its relaxed rate") {
  for (double gap : {4.6, 4.9}) {
    ScenarioConfig cfg;
    cfg.graph_mode = GraphMode::proximity;
    cfg.dt = 1e-6;
    // mu = 2 |p_j - p_i| approaches r = 10; the follower faces away.
    cfg.agents = {{{0.5, 0.0}, std::numbers::pi, 2.0}, {{0.5 + gap, 0.0}, 0.2, 2.0}};
    Engine engine(cfg);
    const World before = engine.world();
    const StepRecord rec = engine.step(Execution::serial);
    const World& after = engine.world();
    REQUIRE(rec.edges.size() == 2);
    REQUIRE(rec.agents[0].qp == QpOutcome::optimal);
    REQUIRE(rec.agents[1].qp == QpOutcome::optimal);
    const auto h = [&](const World& w) {
      return oracle::pair_h(extended_of(w.agents[0]), extended_of(w.agents[1]), cfg.field.shape(),
                            cfg.field.source(), cfg.safety.d_r, cfg.safety.r);
    };
    const double h0 = h(before);
    const double hdot = (h(after) - h0) / cfg.dt;
    const double bound = -(rec.edges[0].gamma + rec.edges[1].gamma) * cfg.safety.kappa * h0;
    CHECK(hdot >= bound - 1e-3 * (std::abs(bound) + std::abs(hdot)));
  }
}

TEST_CASE("free-space flocking error decays") {
  const SimulationLog log = simulate(bundled("free_space.toml"));
  REQUIRE(log.steps.size() == 501);
  for (std::size_t i = 0; i < log.steps.back().agents.size(); ++i) {
    if (i != log.leader) {
      CHECK(std::abs(log.steps.back().agents[i].e_flock) < 1e-2);
    }
  }
  CHECK(log.fallback_count() == 0);
}

TEST_CASE("cluttered scenario leader") {
  const Engine engine(bundled("cluttered.toml"));
  CHECK(engine.assignment().leader == 0);
  CHECK(engine.assignment().followers == std::vector<std::size_t>{1, 2, 3, 4});
}

TEST_CASE("single agent source Lyapunov function never increases") {
  ScenarioConfig cfg;
  cfg.filter = SafetyFilter::none;
  cfg.agents = {{{3.5, 3.0}, 30.0 * std::numbers::pi / 180.0, 0.1}};
  cfg.t_end = 10.0;
  const SimulationLog log = simulate(cfg, Execution::serial);
  for (std::size_t k = 1; k < log.steps.size(); ++k) {
    CHECK(log.steps[k].v_source <= log.steps[k - 1].v_source + 1e-12);
  }
  CHECK(log.steps.back().v_source - 0.5 < 1e-3);
}

TEST_CASE("log grid and bookkeeping") {
  ScenarioConfig cfg = pair_config();
  cfg.t_end = 0.05;
  const SimulationLog log = simulate(cfg, Execution::serial);
  REQUIRE(log.steps.size() == step_count(cfg) + 1);
  for (std::size_t k = 0; k < log.steps.size(); ++k) {
    CHECK(log.steps[k].t == static_cast<double>(k) * cfg.dt);
  }
  CHECK(log.steps[0].agents[0].x == 1.0);
  CHECK(std::isnan(log.steps[0].agents[log.leader].e_flock));
  const MetricsReport m = compute_metrics(log);
  CHECK(std::isinf(m.min_obstacle_clearance));
  CHECK(m.connected_fraction == 1.0);
  CHECK(m.steps == log.steps.size());
}

TEST_CASE("metrics count fallbacks and track extremes") {
  SimulationLog log;
  log.obstacles = {{{0.0, 0.0}, 1.0}};
  log.dt = 0.1;
  for (int k = 0; k < 3; ++k) {
    StepRecord rec;
    rec.t = 0.1 * k;
    AgentSample s;
    s.x = 2.0 + k;
    s.h_obstacle = 0.5 + k;
    s.qp = k == 1 ? QpOutcome::fallback : QpOutcome::optimal;
    rec.agents = {s, s};
    rec.edges = {{0, 1, 1.0 + k, 3.0 - k, 1.0}};
    rec.connected = k != 2;
    log.steps.push_back(rec);
  }
  const MetricsReport m = compute_metrics(log);
  CHECK(m.fallback_count == 2);
  CHECK(log.fallback_count() == 2);
  CHECK(m.min_obstacle_clearance == doctest::Approx(1.0));
  CHECK(m.min_h_obstacle == doctest::Approx(0.5));
  CHECK(m.min_edge_mu == doctest::Approx(1.0));
  CHECK(m.max_edge_mu == doctest::Approx(3.0));
  CHECK(m.min_edge_h == doctest::Approx(1.0));
  CHECK(m.connected_fraction == doctest::Approx(2.0 / 3.0));
  CHECK(metrics_text(m).find("fallback_count = 2\n") != std::string::npos);
  CHECK_THROWS(compute_metrics(SimulationLog{}));
}

TEST_CASE("serial and OpenMP runs are bit-identical") {
  ScenarioConfig cfg = bundled("cluttered.toml");
  cfg.t_end = 0.2;
  const SimulationLog a = simulate(cfg, Execution::serial);
  const SimulationLog b = simulate(cfg, Execution::openmp);
  REQUIRE(a.steps.size() == b.steps.size());
  bool same = true;
  for (std::size_t k = 0; k < a.steps.size(); ++k) {
    for (std::size_t i = 0; i < a.steps[k].agents.size(); ++i) {
      const AgentSample& x = a.steps[k].agents[i];
      const AgentSample& y = b.steps[k].agents[i];
      same = same && x.x == y.x && x.y == y.y && x.theta == y.theta && x.v == y.v &&
             x.a_applied == y.a_applied && x.omega_applied == y.omega_applied;
    }
    same = same && a.steps[k].edges.size() == b.steps[k].edges.size();
  }
  CHECK(same);
}

TEST_CASE("scenario validation") {
  ScenarioConfig cfg = bundled("cluttered.toml");
  CHECK(validate_scenario(cfg).empty());

  ScenarioConfig twin = cfg;
  twin.agents[3].position = twin.agents[1].position;
  CHECK(has_problem(twin, "coincident positions: agents (1, 3)"));

  ScenarioConfig far = cfg;
  far.agents[4].position = {40.0, 40.0};
  CHECK(has_problem(far, "initial graph not connected"));

  ScenarioConfig inside = cfg;
  inside.agents[2].position = {2.67, -0.2};
  CHECK(has_problem(inside, "agent 2: starts inside the margin of obstacle 0"));

  ScenarioConfig close = pair_config();
  close.agents[1].position = {1.01, 0.0};
  CHECK(has_problem(close, "edge (0, 1) starts outside the admissible gradient range"));

  ScenarioConfig slow = cfg;
  slow.agents[0].v0 = 0.0;
  CHECK(has_problem(slow, "agent 0: v0 outside [v_floor, v_max]"));

  ScenarioConfig bad = cfg;
  bad.dt = 0.0;
  bad.gains.d_offset = 1.5;
  CHECK(validate_scenario(bad).size() == 2);
  CHECK_THROWS_AS(Engine{bad}, std::invalid_argument);

  CHECK(has_problem(ScenarioConfig{}, "no agents"));

  ScenarioConfig fixed = pair_config();
  fixed.graph_mode = GraphMode::fixed;
  fixed.fixed_edges = {{0, 1}};
  fixed.agents[1].position = {20.0, 0.0};
  CHECK(validate_scenario(fixed).empty());
  fixed.fixed_edges.clear();
  CHECK(has_problem(fixed, "initial graph not connected"));
}
