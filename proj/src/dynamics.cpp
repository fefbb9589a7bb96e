#include "flock/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace flock {

double wrap_angle(double theta) {
  constexpr double pi = std::numbers::pi;
  double w = std::remainder(theta, 2.0 * pi);
  if (w <= -pi) {
    w += 2.0 * pi;
  }
  return w;
}

Vec2 AgentState::heading() const { return {std::cos(theta), std::sin(theta)}; }

namespace {

struct PoseRate {
  double x, y, theta;
};

PoseRate unicycle_rate(double theta, const KinematicInput& u) {
  return {u.v * std::cos(theta), u.v * std::sin(theta), u.omega};
}

}  // namespace

AgentState step_kinematic(const AgentState& s, const KinematicInput& u, double dt) {
  const PoseRate k1 = unicycle_rate(s.theta, u);
  const PoseRate k2 = unicycle_rate(s.theta + 0.5 * dt * k1.theta, u);
  const PoseRate k3 = unicycle_rate(s.theta + 0.5 * dt * k2.theta, u);
  const PoseRate k4 = unicycle_rate(s.theta + dt * k3.theta, u);
  AgentState next;
  next.x = s.x + dt / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
  next.y = s.y + dt / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y);
  next.theta = wrap_angle(s.theta + dt / 6.0 * (k1.theta + 2.0 * k2.theta + 2.0 * k3.theta + k4.theta));
  return next;
}

Vec5 to_vector(const ExtendedState& s) {
  Vec5 v;
  v << s.x, s.y, s.v, s.xdot, s.ydot;
  return v;
}

ExtendedState from_vector(const Vec5& v) { return {v(0), v(1), v(2), v(3), v(4)}; }

Vec5 extended_drift(const ExtendedState& s) {
  Vec5 f;
  f << s.xdot, s.ydot, 0.0, 0.0, 0.0;
  return f;
}

Mat52 extended_input_matrix(const ExtendedState& s) {
  Mat52 g;
  g << 0.0, 0.0,
       0.0, 0.0,
       1.0, 0.0,
       s.xdot / s.v, -s.ydot,
       s.ydot / s.v, s.xdot;
  return g;
}

ExtendedStep step_extended(const ExtendedState& s, const ExtendedInput& u, double dt, double v_floor) {
  const Eigen::Vector2d input(u.a, u.omega);
  auto rate = [&](const Vec5& xi) {
    const ExtendedState e = from_vector(xi);
    return Vec5(extended_drift(e) + extended_input_matrix(e) * input);
  };
  const Vec5 x0 = to_vector(s);
  const Vec5 k1 = rate(x0);
  const Vec5 k2 = rate(x0 + 0.5 * dt * k1);
  const Vec5 k3 = rate(x0 + 0.5 * dt * k2);
  const Vec5 k4 = rate(x0 + dt * k3);
  ExtendedState next = from_vector(x0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));

  ExtendedStep out;
  if (next.v < v_floor) {
    next.v = v_floor;
    out.clamped = true;
  }
  const double speed = std::hypot(next.xdot, next.ydot);
  if (speed > 0.0) {
    next.xdot *= next.v / speed;
    next.ydot *= next.v / speed;
  } else {
    const double theta = std::atan2(s.ydot, s.xdot);
    next.xdot = next.v * std::cos(theta);
    next.ydot = next.v * std::sin(theta);
  }
  out.state = next;
  return out;
}

ExtendedState to_extended(const AgentState& s, double v, double v_floor) {
  if (!(v >= v_floor)) {
    throw std::invalid_argument("to_extended: speed below v_floor");
  }
  return {s.x, s.y, v, v * std::cos(s.theta), v * std::sin(s.theta)};
}

double heading_of(const ExtendedState& s) { return std::atan2(s.ydot, s.xdot); }

AgentState to_pose(const ExtendedState& s) { return {s.x, s.y, wrap_angle(heading_of(s))}; }

Vec2 offset_point(const AgentState& s, double d) {
  return {s.x + d * std::cos(s.theta), s.y + d * std::sin(s.theta)};
}

}  // namespace flock
