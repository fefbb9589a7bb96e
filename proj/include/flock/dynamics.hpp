#pragma once

#include "flock/environment.hpp"

namespace flock {

/// Lower speed bound shared by the QP box and the integrator clamp. The
/// extended input matrix divides by v, so v must stay strictly positive.
inline constexpr double kDefaultVFloor = 0.01;

/// Wraps an angle into (-pi, pi].
double wrap_angle(double theta);

/// Unicycle pose.
struct AgentState {
  double x{0.0};
  double y{0.0};
  double theta{0.0};

  Vec2 position() const { return {x, y}; }
  Vec2 heading() const;
};

/// Extended unicycle state (x, y, v, xdot, ydot) with (xdot, ydot) = v (cos, sin).
struct ExtendedState {
  double x{0.0};
  double y{0.0};
  double v{1.0};
  double xdot{1.0};
  double ydot{0.0};

  Vec2 position() const { return {x, y}; }
  Vec2 velocity() const { return {xdot, ydot}; }
  /// Unit orientation (xdot, ydot) / v.
  Vec2 orientation() const { return velocity() / v; }
};

struct KinematicInput {
  double v{0.0};
  double omega{0.0};
};

struct ExtendedInput {
  double a{0.0};
  double omega{0.0};
};

/// One RK4 step of the unicycle with the input held over dt.
AgentState step_kinematic(const AgentState& s, const KinematicInput& u, double dt);

struct ExtendedStep {
  ExtendedState state;
  bool clamped{false};
};

/// One RK4 step of xi' = f(xi) + g(xi) u. The velocity is re-projected onto
/// norm v after the step; v below v_floor is clamped and reported.
ExtendedStep step_extended(const ExtendedState& s, const ExtendedInput& u, double dt,
                           double v_floor = kDefaultVFloor);

/// Lifts a pose with speed v into the extended state.
/// Throws std::invalid_argument if v < v_floor.
ExtendedState to_extended(const AgentState& s, double v, double v_floor = kDefaultVFloor);

double heading_of(const ExtendedState& s);

AgentState to_pose(const ExtendedState& s);

/// Point d ahead of the wheel axle along the heading.
Vec2 offset_point(const AgentState& s, double d);

/// Drift f(xi) and input matrix g(xi) of the extended dynamics, as 5-vectors.
using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat52 = Eigen::Matrix<double, 5, 2>;
Vec5 extended_drift(const ExtendedState& s);
Mat52 extended_input_matrix(const ExtendedState& s);

Vec5 to_vector(const ExtendedState& s);
ExtendedState from_vector(const Vec5& v);

}  // namespace flock
