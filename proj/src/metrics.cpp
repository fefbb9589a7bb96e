#include "flock/engine.hpp"

#include "flock/csv.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace flock {

MetricsReport compute_metrics(const SimulationLog& log) {
  if (log.steps.empty()) {
    throw std::invalid_argument("metrics: empty log");
  }
  MetricsReport m;
  m.steps = log.steps.size();
  const StepRecord& last = log.steps.back();
  if (log.leader < last.agents.size()) {
    const AgentSample& l = last.agents[log.leader];
    m.leader_final_distance = (Vec2(l.x, l.y) - log.field.source()).norm();
  }
  for (std::size_t i = 0; i < last.agents.size(); ++i) {
    if (i != log.leader && !std::isnan(last.agents[i].e_flock)) {
      m.max_abs_error_final = std::max(m.max_abs_error_final, std::abs(last.agents[i].e_flock));
    }
  }

  std::size_t connected = 0;
  for (const StepRecord& rec : log.steps) {
    connected += rec.connected ? 1 : 0;
    for (const AgentSample& a : rec.agents) {
      for (const Obstacle& o : log.obstacles) {
        m.min_obstacle_clearance = std::min(m.min_obstacle_clearance, boundary_distance({a.x, a.y}, o));
      }
      m.min_h_obstacle = std::min(m.min_h_obstacle, a.h_obstacle);
      m.fallback_count += a.qp == QpOutcome::fallback ? 1 : 0;
    }
    for (const EdgeSample& e : rec.edges) {
      m.min_edge_mu = std::min(m.min_edge_mu, e.mu);
      m.max_edge_mu = std::max(m.max_edge_mu, e.mu);
      m.min_edge_h = std::min(m.min_edge_h, e.h);
    }
  }
  m.connected_fraction = static_cast<double>(connected) / static_cast<double>(log.steps.size());
  return m;
}

std::string metrics_text(const MetricsReport& m) {
  std::string out;
  auto line = [&](const char* key, const std::string& value) { out += std::string(key) + " = " + value + "\n"; };
  line("leader_final_distance", format_double(m.leader_final_distance));
  line("max_abs_error_final", format_double(m.max_abs_error_final));
  line("min_obstacle_clearance", format_double(m.min_obstacle_clearance));
  line("min_h_obstacle", format_double(m.min_h_obstacle));
  line("min_edge_mu", format_double(m.min_edge_mu));
  line("max_edge_mu", format_double(m.max_edge_mu));
  line("min_edge_h", format_double(m.min_edge_h));
  line("connected_fraction", format_double(m.connected_fraction));
  line("fallback_count", std::to_string(m.fallback_count));
  line("steps", std::to_string(m.steps));
  return out;
}

}  // namespace flock
