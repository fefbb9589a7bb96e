#pragma once

#include "flock/engine.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

namespace flock {

/// Parse failure; the message carries `origin:line:`.
class ScenarioError : public std::runtime_error {
public:
  ScenarioError(const std::string& origin, std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

/// Reads the TOML-style scenario format:
///
///   [field]        hessian = [[1, 0], [0, 1]], center = [0, 0]
///   [[obstacles]]  center, radius
///   [[agents]]     position, heading_deg (or heading_rad), v0
///   [gains]        k_v, k_omega, K_f, k1, k2, d_star, d_offset
///   [safety]       d1, d2, d_r, r, kappa, v_floor, v_max, omega_min, omega_max, gamma_ref
///   [sim]          dt, t_end, graph = "static" | "proximity", edges = [[0, 1], ...] | "complete",
///                  controller = "unconstrained" | "constrained", filter = "qp" | "none"
///
/// Only syntax and types are checked here; see validate_scenario for the rest.
ScenarioConfig parse_scenario(std::string_view text, const std::string& origin = "<input>");

ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Writes cfg back in the same format; parse_scenario(dump_scenario(c)) == c bit for bit.
std::string dump_scenario(const ScenarioConfig& cfg);

FlockingLaw parse_controller(std::string_view name);
std::string_view controller_name(FlockingLaw law);

}  // namespace flock
