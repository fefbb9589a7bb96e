#include "flock/engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace flock {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Extended state used for barrier evaluation; in kinematic mode the speed may
// drop below the floor, so it is lifted to keep the orientation defined.
ExtendedState barrier_state(const AgentState& pose, double v, double v_floor) {
  const double speed = std::max(v, v_floor);
  return {pose.x, pose.y, speed, speed * std::cos(pose.theta), speed * std::sin(pose.theta)};
}

std::string fmt_pair(std::size_t i, std::size_t j) {
  std::ostringstream os;
  os << "(" << i << ", " << j << ")";
  return os.str();
}

Graph initial_graph(const ScenarioConfig& cfg) {
  const std::size_t n = cfg.agents.size();
  if (cfg.graph_mode == GraphMode::fixed) {
    return Graph::from_edges(n, cfg.fixed_edges);
  }
  std::vector<Vec2> grads;
  grads.reserve(n);
  for (const AgentInit& a : cfg.agents) {
    grads.push_back(cfg.field.gradient(a.position));
  }
  return proximity_edges(grads, cfg.safety.r);
}

}  // namespace

PairBarrier pair_barrier_kind(GraphMode mode) {
  return mode == GraphMode::fixed ? PairBarrier::separation : PairBarrier::connectivity;
}

std::size_t step_count(const ScenarioConfig& cfg) {
  return static_cast<std::size_t>(std::llround(cfg.t_end / cfg.dt));
}

std::vector<std::string> validate_scenario(const ScenarioConfig& cfg) {
  std::vector<std::string> out;
  auto require = [&](bool ok, const std::string& what) {
    if (!ok) {
      out.push_back(what);
    }
  };

  require(!cfg.agents.empty(), "no agents");
  require(std::isfinite(cfg.dt) && cfg.dt > 0.0, "dt must be positive");
  require(std::isfinite(cfg.t_end) && cfg.t_end >= 0.0, "t_end must be non-negative");

  const ControlGains& g = cfg.gains;
  require(g.k_v > 0.0 && g.k_omega > 0.0, "source-seeking gains must be positive");
  require(g.K_f > 0.0, "K_f must be positive");
  require(g.k1 > 0.0 && g.k2 > 0.0, "k1 and k2 must be positive");
  require(g.d_star > 0.0, "d_star must be positive");
  require(g.d_offset > 0.0 && g.d_offset < 1.0, "d_offset must lie in (0, 1)");

  const SafetyParams& s = cfg.safety;
  require(s.d1 > 0.0, "d1 must be positive");
  require(s.d2 > 0.0, "d2 must be positive");
  require(s.d_r > 0.0, "d_r must be positive");
  require(s.kappa > 0.0, "kappa must be positive");
  require(s.r > g.d_star, "r must exceed d_star");
  require(s.r > s.d_r, "r must exceed d_r");
  require(cfg.limits.v_max * s.d2 < 1.0, "v_max * d2 must be below 1");
  require(std::isfinite(cfg.gamma_ref), "gamma_ref must be finite");

  const InputLimits& lim = cfg.limits;
  require(lim.v_floor > 0.0 && lim.v_floor < lim.v_max, "speed bounds must satisfy 0 < v_floor < v_max");
  require(lim.omega_min < lim.omega_max, "omega_min must be below omega_max");

  for (std::size_t k = 0; k < cfg.obstacles.size(); ++k) {
    require(cfg.obstacles[k].radius > 0.0, "obstacle " + std::to_string(k) + ": radius must be positive");
  }

  const std::size_t n = cfg.agents.size();
  for (std::size_t i = 0; i < n; ++i) {
    const AgentInit& a = cfg.agents[i];
    const std::string tag = "agent " + std::to_string(i) + ": ";
    require(a.position.allFinite() && std::isfinite(a.theta), tag + "non-finite initial state");
    require(a.v0 >= lim.v_floor && a.v0 <= lim.v_max, tag + "v0 outside [v_floor, v_max]");
    for (std::size_t k = 0; k < cfg.obstacles.size(); ++k) {
      if (!(boundary_distance(a.position, cfg.obstacles[k]) > s.d1)) {
        out.push_back(tag + "starts inside the margin of obstacle " + std::to_string(k));
      }
    }
    for (std::size_t j = i + 1; j < n; ++j) {
      if (a.position == cfg.agents[j].position) {
        out.push_back("coincident positions: agents " + fmt_pair(i, j));
      }
    }
  }
  if (!out.empty()) {
    return out;
  }

  Graph g0;
  try {
    g0 = initial_graph(cfg);
  } catch (const std::invalid_argument& e) {
    out.push_back(e.what());
    return out;
  }
  if (!is_connected(g0)) {
    out.push_back("initial graph not connected");
  }
  const PairBarrier kind = pair_barrier_kind(cfg.graph_mode);
  for (const auto& [i, j] : g0.edges()) {
    const double mu = gradient_distance(cfg.field.gradient(cfg.agents[i].position),
                                        cfg.field.gradient(cfg.agents[j].position));
    const bool ok = mu > s.d_r && (kind == PairBarrier::separation || mu < s.r);
    if (!ok) {
      out.push_back("edge " + fmt_pair(i, j) + " starts outside the admissible gradient range");
    }
  }
  return out;
}

std::size_t SimulationLog::fallback_count() const {
  std::size_t count = 0;
  for (const StepRecord& rec : steps) {
    for (const AgentSample& a : rec.agents) {
      count += a.qp == QpOutcome::fallback ? 1 : 0;
    }
  }
  return count;
}

NeighborReport make_report(std::size_t id, const AgentRecord& agent, const ScalarField& field) {
  const Vec2 p = agent.pose.position();
  return {id, p, agent.v, agent.pose.theta, field.gradient(p), field.hessian(p)};
}

AgentDecision decide_agent(const LocalView& view, const AgentContext& ctx) {
  const ScalarField& field = *ctx.field;
  const AgentState& pose = view.self.pose;
  const Vec2 p = pose.position();
  AgentDecision d;

  std::vector<Vec2> grads;
  grads.reserve(view.neighbors.size());
  for (const NeighborReport& nb : view.neighbors) {
    grads.push_back(nb.grad);
  }

  if (view.is_leader) {
    d.nominal = source_seeking(pose.theta, field.gradient(p), ctx.gains);
  } else if (ctx.law == FlockingLaw::unconstrained) {
    const Vec2 offset = offset_point(pose, ctx.gains.d_offset);
    const auto err = flocking_error(field.gradient(offset), grads, ctx.gains.d_star);
    if (err) {
      d.nominal = flocking_unconstrained(pose, *err, field.hessian(offset), view.neighbors, ctx.gains);
      d.e_flock = err->e;
      d.mu_flock = err->mu;
      d.beta = err->beta_defined ? err->beta : kNaN;
    } else {
      d.fragmented = true;
    }
  } else {
    const auto err = flocking_error_vector(field.gradient(p), pose.theta, grads, ctx.gains.d_star);
    if (err) {
      d.nominal = flocking_constrained(pose, *err, field.hessian(p), view.neighbors, ctx.gains);
      d.e_flock = err->e_vec.norm();
      d.mu_flock = err->mu_vec.norm();
      d.e_vec = err->e_vec;
      d.beta = err->mu_vec.norm() > 0.0 ? std::atan2(err->mu_vec.y(), err->mu_vec.x()) : kNaN;
    } else {
      d.fragmented = true;
    }
  }
  if (d.fragmented) {
    // Hold course until a neighbor reappears.
    d.nominal = {view.self.v, 0.0};
  }

  const ExtendedState xi = barrier_state(pose, view.self.v, ctx.limits.v_floor);
  const auto obs = obstacle_barrier(xi, ctx.obstacles, ctx.safety);
  if (obs) {
    d.h_obstacle = obs->h;
  }
  std::vector<PairBarrierResult> pairs;
  pairs.reserve(view.neighbors.size());
  for (const NeighborReport& nb : view.neighbors) {
    const ExtendedState xj = barrier_state({nb.position.x(), nb.position.y(), nb.theta}, nb.v, ctx.limits.v_floor);
    pairs.push_back(connectivity_barrier(xi, xj, field, ctx.safety, ctx.pair_kind));
    d.edges.push_back({view.id, nb.id, pairs.back().mu, pairs.back().h, kNaN});
  }

  const double a_ref = reference_acceleration(d.nominal.v, view.self.v, ctx.dt);
  if (ctx.filter == SafetyFilter::none) {
    d.v_command = d.nominal.v;
    d.applied = {a_ref, d.nominal.omega};
    return d;
  }

  const auto m = static_cast<Eigen::Index>(pairs.size());
  qp::Problem prob;
  prob.z_ref = Eigen::VectorXd::Constant(2 + m, ctx.gamma_ref);
  prob.z_ref(0) = a_ref;
  prob.z_ref(1) = d.nominal.omega;
  if (obs) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(2 + m);
    a.head<2>() = obs->constraint.coeff_u;
    prob.rows.push_back({a, -obs->constraint.offset});
  }
  for (Eigen::Index k = 0; k < m; ++k) {
    const LinearConstraint& row = pairs[static_cast<std::size_t>(k)].constraint;
    Eigen::VectorXd a = Eigen::VectorXd::Zero(2 + m);
    a.head<2>() = row.coeff_u;
    a(2 + k) = *row.coeff_gamma;
    prob.rows.push_back({a, -row.offset});
  }
  const double v = view.self.v;
  prob.boxes.push_back({0, (ctx.limits.v_floor - v) / ctx.dt, (ctx.limits.v_max - v) / ctx.dt});
  prob.boxes.push_back({1, ctx.limits.omega_min, ctx.limits.omega_max});

  const qp::Solution sol = qp::solve(prob);
  if (sol.status == qp::Status::optimal) {
    d.qp = QpOutcome::optimal;
    d.applied = {sol.z_star(0), sol.z_star(1)};
    for (Eigen::Index k = 0; k < m; ++k) {
      d.edges[static_cast<std::size_t>(k)].gamma = sol.z_star(2 + k);
    }
  } else {
    d.qp = QpOutcome::fallback;
    d.applied = {(ctx.limits.v_floor - v) / ctx.dt, 0.0};
  }
  d.v_command = v + d.applied.a * ctx.dt;
  return d;
}

AgentRecord integrate_agent(const AgentRecord& agent, const AgentDecision& decision, const AgentContext& ctx,
                            bool* v_clamped) {
  if (ctx.filter == SafetyFilter::none) {
    if (v_clamped) {
      *v_clamped = false;
    }
    return {step_kinematic(agent.pose, {decision.v_command, decision.applied.omega}, ctx.dt), decision.v_command};
  }
  const ExtendedState xi = to_extended(agent.pose, agent.v, ctx.limits.v_floor);
  const ExtendedStep next = step_extended(xi, decision.applied, ctx.dt, ctx.limits.v_floor);
  if (v_clamped) {
    *v_clamped = next.clamped;
  }
  return {to_pose(next.state), next.state.v};
}

Engine::Engine(ScenarioConfig cfg) : cfg_(std::move(cfg)) {
  const auto problems = validate_scenario(cfg_);
  if (!problems.empty()) {
    std::string msg = "invalid scenario:";
    for (const auto& p : problems) {
      msg += "\n  " + p;
    }
    throw std::invalid_argument(msg);
  }
  std::vector<Vec2> positions;
  for (const AgentInit& a : cfg_.agents) {
    positions.push_back(a.position);
    world_.agents.push_back({{a.position.x(), a.position.y(), wrap_angle(a.theta)}, a.v0});
  }
  assignment_ = select_leader(positions, cfg_.field);
  if (cfg_.graph_mode == GraphMode::fixed) {
    fixed_graph_ = Graph::from_edges(cfg_.agents.size(), cfg_.fixed_edges);
  }
}

AgentContext Engine::context() const {
  AgentContext ctx;
  ctx.field = &cfg_.field;
  ctx.obstacles = cfg_.obstacles;
  ctx.law = cfg_.controller;
  ctx.filter = cfg_.filter;
  ctx.pair_kind = pair_barrier_kind(cfg_.graph_mode);
  ctx.gains = cfg_.gains;
  ctx.safety = cfg_.safety;
  ctx.limits = cfg_.limits;
  ctx.gamma_ref = cfg_.gamma_ref;
  ctx.dt = cfg_.dt;
  return ctx;
}

Graph Engine::current_graph(Execution exec) const {
  if (cfg_.graph_mode == GraphMode::fixed) {
    return fixed_graph_;
  }
  const std::size_t n = world_.agents.size();
  std::vector<Vec2> grads(n);
  for (std::size_t i = 0; i < n; ++i) {
    grads[i] = cfg_.field.gradient(world_.agents[i].pose.position());
  }
  if (exec == Execution::serial) {
    return proximity_edges(grads, cfg_.safety.r);
  }
  // Each row is filled independently; symmetry holds because the norm of a
  // negated difference is bit-identical.
  std::vector<unsigned char> adj(n * n, 0);
  const auto sn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t si = 0; si < sn; ++si) {
    const auto i = static_cast<std::size_t>(si);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && gradient_distance(grads[i], grads[j]) < cfg_.safety.r) {
        adj[i * n + j] = 1;
      }
    }
  }
  return Graph::from_adjacency(n, std::move(adj));
}

StepRecord Engine::step(Execution exec, bool advance) {
  const std::size_t n = world_.agents.size();
  const auto sn = static_cast<std::ptrdiff_t>(n);
  const AgentContext ctx = context();
  const Graph graph = current_graph(exec);

  std::vector<NeighborReport> reports(n);
  std::vector<AgentDecision> decisions(n);
  std::vector<AgentRecord> next(n);
  std::vector<unsigned char> clamped(n, 0);

  auto report = [&](std::size_t i) { reports[i] = make_report(i, world_.agents[i], cfg_.field); };
  auto decide = [&](std::size_t i) {
    std::vector<NeighborReport> local;
    for (std::size_t j : graph.neighbors(i)) {
      local.push_back(reports[j]);
    }
    const LocalView view{i, assignment_.is_leader(i), world_.agents[i], local};
    decisions[i] = decide_agent(view, ctx);
  };
  auto advance_one = [&](std::size_t i) {
    bool c = false;
    next[i] = integrate_agent(world_.agents[i], decisions[i], ctx, &c);
    clamped[i] = c ? 1 : 0;
  };

  if (exec == Execution::serial) {
    for (std::size_t i = 0; i < n; ++i) report(i);
    for (std::size_t i = 0; i < n; ++i) decide(i);
    if (advance) {
      for (std::size_t i = 0; i < n; ++i) advance_one(i);
    }
  } else {
#pragma omp parallel
    {
#pragma omp for schedule(static)
      for (std::ptrdiff_t i = 0; i < sn; ++i) report(static_cast<std::size_t>(i));
#pragma omp for schedule(dynamic, 4)
      for (std::ptrdiff_t i = 0; i < sn; ++i) decide(static_cast<std::size_t>(i));
      if (advance) {
#pragma omp for schedule(static)
        for (std::ptrdiff_t i = 0; i < sn; ++i) advance_one(static_cast<std::size_t>(i));
      }
    }
  }

  StepRecord rec;
  rec.t = static_cast<double>(world_.step) * cfg_.dt;
  rec.connected = is_connected(graph);
  rec.agents.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const AgentRecord& a = world_.agents[i];
    const AgentDecision& d = decisions[i];
    AgentSample& s = rec.agents[i];
    s.x = a.pose.x;
    s.y = a.pose.y;
    s.theta = a.pose.theta;
    s.v = a.v;
    s.a_applied = d.applied.a;
    s.omega_applied = d.applied.omega;
    s.v_nominal = d.nominal.v;
    s.omega_nominal = d.nominal.omega;
    s.e_flock = d.e_flock;
    s.h_obstacle = d.h_obstacle;
    s.mu_flock = d.mu_flock;
    s.beta = d.beta;
    s.qp = d.qp;
    s.v_clamped = clamped[i] != 0;
    rec.edges.insert(rec.edges.end(), d.edges.begin(), d.edges.end());
  }
  rec.v_source = source_lyapunov(cfg_.field, world_.agents[assignment_.leader].pose);
  rec.v_flock = flocking_lyapunov(rec, cfg_.controller, assignment_.leader);

  if (advance) {
    world_.agents = std::move(next);
    ++world_.step;
    world_.t = static_cast<double>(world_.step) * cfg_.dt;
  }
  return rec;
}

double flocking_lyapunov(const StepRecord& rec, FlockingLaw law, std::size_t leader) {
  double v = 0.0;
  for (std::size_t i = 0; i < rec.agents.size(); ++i) {
    if (i == leader || std::isnan(rec.agents[i].e_flock)) {
      continue;
    }
    const double e = rec.agents[i].e_flock;
    v += 0.5 * e * e;
    if (law == FlockingLaw::constrained) {
      const double c = std::cos(rec.agents[i].theta);
      const double s = std::sin(rec.agents[i].theta);
      v += 0.5 * (c * c + s * s);
    }
  }
  return v;
}

SimulationLog simulate(const ScenarioConfig& cfg, Execution exec) {
  Engine engine(cfg);
  SimulationLog log;
  log.field = cfg.field;
  log.obstacles = cfg.obstacles;
  log.leader = engine.assignment().leader;
  log.dt = cfg.dt;
  const std::size_t steps = step_count(cfg);
  log.steps.reserve(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    log.steps.push_back(engine.step(exec, k < steps));
  }
  return log;
}

}  // namespace flock
