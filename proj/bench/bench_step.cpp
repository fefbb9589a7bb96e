#include "flock/engine.hpp"

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>

using namespace flock;

namespace {

/// Agents on a jittered grid around (6, 6) with a few obstacles outside it.
ScenarioConfig swarm(std::size_t side) {
  ScenarioConfig cfg;
  cfg.safety.r = 1e3;
  for (std::size_t i = 0; i < side; ++i) {
    for (std::size_t j = 0; j < side; ++j) {
      AgentInit a;
      a.position = {6.0 + 0.3 * static_cast<double>(i) + 0.01 * static_cast<double>(j % 3),
                    6.0 + 0.3 * static_cast<double>(j) + 0.01 * static_cast<double>(i % 5)};
      a.theta = std::numbers::pi * (0.2 + 0.01 * static_cast<double>(i + j));
      cfg.agents.push_back(a);
    }
  }
  cfg.obstacles = {{{2.0, 2.0}, 0.5}, {{4.0, 1.0}, 0.4}};
  cfg.dt = 0.01;
  cfg.t_end = 0.2;
  return cfg;
}

double seconds(const ScenarioConfig& cfg, Execution exec, SimulationLog* out) {
  const auto start = std::chrono::steady_clock::now();
  *out = simulate(cfg, exec);
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t side = argc > 1 ? static_cast<std::size_t>(std::atoi(argv[1])) : 6;
  const ScenarioConfig cfg = swarm(side);
  SimulationLog serial_log, omp_log;
  const double ts = seconds(cfg, Execution::serial, &serial_log);
  const double tp = seconds(cfg, Execution::openmp, &omp_log);

  bool same = serial_log.steps.size() == omp_log.steps.size();
  for (std::size_t k = 0; same && k < serial_log.steps.size(); ++k) {
    const auto& a = serial_log.steps[k].agents;
    const auto& b = omp_log.steps[k].agents;
    for (std::size_t i = 0; i < a.size(); ++i) {
      same = same && a[i].x == b[i].x && a[i].y == b[i].y && a[i].theta == b[i].theta && a[i].v == b[i].v;
    }
  }
  std::printf("agents=%zu steps=%zu threads=%d\n", cfg.agents.size(), serial_log.steps.size(),
              omp_get_max_threads());
  std::printf("serial  %.3f s\nopenmp  %.3f s\nspeedup %.2fx\nidentical %s\n", ts, tp, ts / tp,
              same ? "yes" : "no");
  return same ? 0 : 1;
}
