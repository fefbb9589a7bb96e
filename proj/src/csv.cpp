#include "flock/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace flock {

CsvError::CsvError(std::size_t row, const std::string& what)
    : std::runtime_error("row " + std::to_string(row) + ": " + what), row_(row) {}

std::string format_double(double x) {
  if (std::isnan(x)) {
    return "nan";
  }
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') {
    s.remove_prefix(1);
  }
  double x = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("not a number: '" + std::string(s) + "'");
  }
  return x;
}

namespace {

std::size_t parse_index(std::string_view s) {
  std::size_t x = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("not an index: '" + std::string(s) + "'");
  }
  return x;
}

/// Calls fn(line_number, fields) for every data row after checking the header.
template <typename Fn>
void for_each_row(std::string_view text, std::string_view header, std::size_t width, Fn fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  std::vector<std::string_view> fields;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.remove_suffix(1);
    }
    if (line_no == 1) {
      if (line != header) {
        throw CsvError(1, "unexpected header");
      }
      continue;
    }
    if (line.empty()) {
      continue;
    }
    fields.clear();
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      if (comma == std::string_view::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
    if (fields.size() != width) {
      throw CsvError(line_no, "expected " + std::to_string(width) + " fields, got " + std::to_string(fields.size()));
    }
    try {
      fn(line_no, fields);
    } catch (const std::invalid_argument& e) {
      throw CsvError(line_no, e.what());
    }
  }
  if (line_no == 0) {
    throw CsvError(1, "missing header");
  }
}

}  // namespace

std::string trajectory_csv(const SimulationLog& log) {
  std::string out(kTrajectoryHeader);
  out += '\n';
  for (const StepRecord& rec : log.steps) {
    const std::string t = format_double(rec.t);
    for (std::size_t i = 0; i < rec.agents.size(); ++i) {
      const AgentSample& a = rec.agents[i];
      out += t;
      out += ',';
      out += std::to_string(i);
      for (double x : {a.x, a.y, a.theta, a.v, a.a_applied, a.omega_applied, a.v_nominal, a.omega_nominal,
                       a.e_flock, a.h_obstacle}) {
        out += ',';
        out += format_double(x);
      }
      out += '\n';
    }
  }
  return out;
}

std::string edges_csv(const SimulationLog& log) {
  std::string out(kEdgeHeader);
  out += '\n';
  for (const StepRecord& rec : log.steps) {
    const std::string t = format_double(rec.t);
    for (const EdgeSample& e : rec.edges) {
      out += t + ',' + std::to_string(e.i) + ',' + std::to_string(e.j) + ',' + format_double(e.mu) + ',' +
             format_double(e.h) + ',' + format_double(e.gamma) + '\n';
    }
  }
  return out;
}

std::string events_csv(const SimulationLog& log) {
  std::string out(kEventHeader);
  out += '\n';
  for (const StepRecord& rec : log.steps) {
    const std::string t = format_double(rec.t);
    for (std::size_t i = 0; i < rec.agents.size(); ++i) {
      if (rec.agents[i].qp == QpOutcome::fallback) {
        out += t + ',' + std::to_string(i) + ",fallback\n";
      }
      if (rec.agents[i].v_clamped) {
        out += t + ',' + std::to_string(i) + ",v_clamped\n";
      }
    }
  }
  return out;
}

std::vector<TrajectoryRow> parse_trajectory_csv(std::string_view text) {
  std::vector<TrajectoryRow> rows;
  for_each_row(text, kTrajectoryHeader, 12, [&](std::size_t, const std::vector<std::string_view>& f) {
    TrajectoryRow r;
    r.t = parse_double(f[0]);
    r.agent_id = parse_index(f[1]);
    r.x = parse_double(f[2]);
    r.y = parse_double(f[3]);
    r.theta = parse_double(f[4]);
    r.v = parse_double(f[5]);
    r.a_applied = parse_double(f[6]);
    r.omega_applied = parse_double(f[7]);
    r.v_nominal = parse_double(f[8]);
    r.omega_nominal = parse_double(f[9]);
    r.e_flock = parse_double(f[10]);
    r.h_obstacle = parse_double(f[11]);
    rows.push_back(r);
  });
  return rows;
}

std::vector<EdgeRow> parse_edges_csv(std::string_view text) {
  std::vector<EdgeRow> rows;
  for_each_row(text, kEdgeHeader, 6, [&](std::size_t, const std::vector<std::string_view>& f) {
    rows.push_back({parse_double(f[0]), parse_index(f[1]), parse_index(f[2]), parse_double(f[3]),
                    parse_double(f[4]), parse_double(f[5])});
  });
  return rows;
}

std::vector<EventRow> parse_events_csv(std::string_view text) {
  std::vector<EventRow> rows;
  for_each_row(text, kEventHeader, 3, [&](std::size_t, const std::vector<std::string_view>& f) {
    EventRow r{parse_double(f[0]), parse_index(f[1]), EventKind::fallback};
    if (f[2] == "v_clamped") {
      r.kind = EventKind::v_clamped;
    } else if (f[2] != "fallback") {
      throw std::invalid_argument("unknown event '" + std::string(f[2]) + "'");
    }
    rows.push_back(r);
  });
  return rows;
}

SimulationLog log_from_rows(const std::vector<TrajectoryRow>& traj, const std::vector<EdgeRow>& edges,
                            const std::vector<EventRow>& events, const ScenarioConfig& cfg) {
  const std::size_t n = cfg.agents.size();
  if (n == 0 || traj.size() % n != 0) {
    throw CsvError(0, "trajectory rows do not match the agent count " + std::to_string(n));
  }
  SimulationLog log;
  log.field = cfg.field;
  log.obstacles = cfg.obstacles;
  log.dt = cfg.dt;
  std::vector<Vec2> positions;
  for (const AgentInit& a : cfg.agents) {
    positions.push_back(a.position);
  }
  log.leader = select_leader(positions, cfg.field).leader;

  const std::size_t steps = traj.size() / n;
  log.steps.resize(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    StepRecord& rec = log.steps[k];
    rec.t = static_cast<double>(k) * cfg.dt;
    rec.agents.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const TrajectoryRow& r = traj[k * n + i];
      const std::size_t row_no = k * n + i + 2;
      if (r.agent_id != i || r.t != rec.t) {
        throw CsvError(row_no, "rows are not on the uniform (t, agent) grid");
      }
      AgentSample& a = rec.agents[i];
      a.x = r.x;
      a.y = r.y;
      a.theta = r.theta;
      a.v = r.v;
      a.a_applied = r.a_applied;
      a.omega_applied = r.omega_applied;
      a.v_nominal = r.v_nominal;
      a.omega_nominal = r.omega_nominal;
      a.e_flock = r.e_flock;
      a.h_obstacle = r.h_obstacle;
      a.qp = cfg.filter == SafetyFilter::qp ? QpOutcome::optimal : QpOutcome::skipped;
    }
  }

  auto step_of = [&](double t, std::size_t row_no) {
    const double k = std::round(t / cfg.dt);
    if (!(k >= 0.0) || k >= static_cast<double>(steps) || static_cast<double>(k) * cfg.dt != t) {
      throw CsvError(row_no, "time is not on the trajectory grid");
    }
    return static_cast<std::size_t>(k);
  };
  for (std::size_t r = 0; r < edges.size(); ++r) {
    const EdgeRow& e = edges[r];
    if (e.i >= n || e.j >= n || e.i == e.j) {
      throw CsvError(r + 2, "edge endpoints out of range");
    }
    log.steps[step_of(e.t, r + 2)].edges.push_back({e.i, e.j, e.mu, e.h, e.gamma});
  }
  for (std::size_t r = 0; r < events.size(); ++r) {
    const EventRow& ev = events[r];
    if (ev.agent_id >= n) {
      throw CsvError(r + 2, "agent id out of range");
    }
    AgentSample& a = log.steps[step_of(ev.t, r + 2)].agents[ev.agent_id];
    if (ev.kind == EventKind::fallback) {
      a.qp = QpOutcome::fallback;
    } else {
      a.v_clamped = true;
    }
  }

  for (StepRecord& rec : log.steps) {
    Graph g(n);
    for (const EdgeSample& e : rec.edges) {
      g.connect(e.i, e.j);
    }
    rec.connected = is_connected(g);
    const AgentSample& l = rec.agents[log.leader];
    rec.v_source = source_lyapunov(cfg.field, {l.x, l.y, l.theta});
    rec.v_flock = flocking_lyapunov(rec, cfg.controller, log.leader);
  }
  return log;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot read " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot write " + tmp.string());
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      throw std::runtime_error("write failed for " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace flock
