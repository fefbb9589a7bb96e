#pragma once

#include "flock/engine.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace flock {

class CsvError : public std::runtime_error {
public:
  CsvError(std::size_t row, const std::string& what);
  /// 1-based line number in the file, header included.
  std::size_t row() const { return row_; }

private:
  std::size_t row_;
};

/// 17 significant digits; "nan", "inf", "-inf" for non-finite values.
std::string format_double(double x);
/// Throws std::invalid_argument unless the whole field is a number.
double parse_double(std::string_view s);

struct TrajectoryRow {
  double t{0.0};
  std::size_t agent_id{0};
  double x{0.0};
  double y{0.0};
  double theta{0.0};
  double v{0.0};
  double a_applied{0.0};
  double omega_applied{0.0};
  double v_nominal{0.0};
  double omega_nominal{0.0};
  double e_flock{0.0};
  double h_obstacle{0.0};
};

struct EdgeRow {
  double t{0.0};
  std::size_t i{0};
  std::size_t j{0};
  double mu{0.0};
  double h{0.0};
  double gamma{0.0};
};

enum class EventKind { fallback, v_clamped };

struct EventRow {
  double t{0.0};
  std::size_t agent_id{0};
  EventKind kind{EventKind::fallback};
};

inline constexpr std::string_view kTrajectoryHeader =
    "t,agent_id,x,y,theta,v,a_applied,omega_applied,v_nominal,omega_nominal,e_flock,h_obstacle";
inline constexpr std::string_view kEdgeHeader = "t,i,j,mu_ij,h_ij,gamma_ij";
inline constexpr std::string_view kEventHeader = "t,agent_id,event";

std::string trajectory_csv(const SimulationLog& log);
std::string edges_csv(const SimulationLog& log);
/// QP fallbacks and speed-floor clamps, one row each.
std::string events_csv(const SimulationLog& log);

std::vector<TrajectoryRow> parse_trajectory_csv(std::string_view text);
std::vector<EdgeRow> parse_edges_csv(std::string_view text);
std::vector<EventRow> parse_events_csv(std::string_view text);

/// Rebuilds the observable part of a log (agent samples, edges, connectivity,
/// fallback flags, Lyapunov values) from its CSV rows. Throws CsvError if the
/// rows do not form a uniform grid with every agent present at every step.
SimulationLog log_from_rows(const std::vector<TrajectoryRow>& traj, const std::vector<EdgeRow>& edges,
                            const std::vector<EventRow>& events, const ScenarioConfig& cfg);

std::string read_file(const std::filesystem::path& path);
/// Writes through a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace flock
