#include "flock/csv.hpp"
#include "flock/engine.hpp"
#include "flock/scenario.hpp"
#include "flock/svg.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace flock;

namespace {

int report_problems(const std::vector<std::string>& problems) {
  for (const std::string& p : problems) {
    std::cerr << "invalid: " << p << "\n";
  }
  return problems.empty() ? 0 : 1;
}

fs::path sibling(const fs::path& csv, const std::string& name) { return csv.parent_path() / name; }

int cmd_validate(const std::string& config) {
  const ScenarioConfig cfg = load_scenario(config);
  const int rc = report_problems(validate_scenario(cfg));
  if (rc == 0) {
    std::cout << "valid: " << cfg.agents.size() << " agents, " << cfg.obstacles.size() << " obstacles\n";
  }
  return rc;
}

int cmd_run(const std::string& config, const std::string& out, std::optional<double> dt,
            std::optional<double> t_end, const std::string& controller) {
  ScenarioConfig cfg = load_scenario(config);
  if (dt) {
    cfg.dt = *dt;
  }
  if (t_end) {
    cfg.t_end = *t_end;
  }
  if (!controller.empty()) {
    cfg.controller = parse_controller(controller);
  }
  if (report_problems(validate_scenario(cfg)) != 0) {
    return 1;
  }
  const SimulationLog log = simulate(cfg);
  const MetricsReport m = compute_metrics(log);

  const fs::path dir(out);
  fs::create_directories(dir);
  write_file_atomic(dir / "trajectory.csv", trajectory_csv(log));
  write_file_atomic(dir / "edges.csv", edges_csv(log));
  write_file_atomic(dir / "events.csv", events_csv(log));
  write_file_atomic(dir / "scenario.toml", dump_scenario(cfg));
  const std::string text = metrics_text(m);
  write_file_atomic(dir / "metrics.txt", text);
  std::cout << text;
  if (m.fallback_count > 0) {
    std::cerr << "warning: " << m.fallback_count << " QP fallback(s); run is not certified safe\n";
    return 2;
  }
  return 0;
}

std::optional<ScenarioConfig> optional_config(const std::string& given, const fs::path& csv) {
  if (!given.empty()) {
    return load_scenario(given);
  }
  const fs::path p = sibling(csv, "scenario.toml");
  if (fs::exists(p)) {
    return load_scenario(p);
  }
  return std::nullopt;
}

int cmd_metrics(const std::string& csv, const std::string& config, std::string edges, std::string events) {
  const auto cfg = optional_config(config, csv);
  if (!cfg) {
    std::cerr << "error: no scenario.toml next to " << csv << "; pass --config\n";
    return 1;
  }
  if (edges.empty()) {
    edges = sibling(csv, "edges.csv").string();
  }
  if (events.empty()) {
    events = sibling(csv, "events.csv").string();
  }
  const auto traj = parse_trajectory_csv(read_file(csv));
  const auto edge_rows = fs::exists(edges) ? parse_edges_csv(read_file(edges)) : std::vector<EdgeRow>{};
  const auto event_rows = fs::exists(events) ? parse_events_csv(read_file(events)) : std::vector<EventRow>{};
  std::cout << metrics_text(compute_metrics(log_from_rows(traj, edge_rows, event_rows, *cfg)));
  return 0;
}

int cmd_plot(const std::string& csv, const std::string& out, const std::string& config) {
  const auto rows = parse_trajectory_csv(read_file(csv));
  const auto cfg = optional_config(config, csv);
  std::vector<Obstacle> obstacles;
  std::optional<std::size_t> leader;
  if (cfg) {
    obstacles = cfg->obstacles;
    std::vector<Vec2> positions;
    for (const AgentInit& a : cfg->agents) {
      positions.push_back(a.position);
    }
    if (!positions.empty()) {
      leader = select_leader(positions, cfg->field).leader;
    }
  }
  write_file_atomic(out, render_svg(rows, obstacles, leader));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Leader-follower flocking simulator with barrier-function safety filters"};
  app.require_subcommand(1);

  std::string config, out, csv, controller, edges, events;
  std::optional<double> dt, t_end;

  auto* validate = app.add_subcommand("validate", "Check a scenario file");
  validate->add_option("config", config, "Scenario file")->required();

  auto* run = app.add_subcommand("run", "Simulate a scenario and write CSV logs and metrics");
  run->add_option("config", config, "Scenario file")->required();
  run->add_option("--out", out, "Output directory")->required();
  run->add_option("--dt", dt, "Override the time step");
  run->add_option("--t-end", t_end, "Override the final time");
  run->add_option("--controller", controller, "Flocking law")
      ->check(CLI::IsMember({"unconstrained", "constrained"}));

  auto* plot = app.add_subcommand("plot", "Render a trajectory CSV as SVG");
  plot->add_option("csv", csv, "Trajectory CSV")->required();
  plot->add_option("--out", out, "Output SVG")->required();
  plot->add_option("--config", config, "Scenario file (default: scenario.toml next to the CSV)");

  auto* metrics = app.add_subcommand("metrics", "Recompute metrics from a trajectory CSV");
  metrics->add_option("csv", csv, "Trajectory CSV")->required();
  metrics->add_option("--config", config, "Scenario file (default: scenario.toml next to the CSV)");
  metrics->add_option("--edges", edges, "Edge CSV (default: edges.csv next to the CSV)");
  metrics->add_option("--events", events, "Event CSV (default: events.csv next to the CSV)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*validate) {
      return cmd_validate(config);
    }
    if (*run) {
      return cmd_run(config, out, dt, t_end, controller);
    }
    if (*plot) {
      return cmd_plot(csv, out, config);
    }
    if (*metrics) {
      return cmd_metrics(csv, config, edges, events);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
