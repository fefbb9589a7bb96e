#include "flock/control.hpp"

#include <cmath>
#include <stdexcept>

namespace flock {

namespace {

Vec2 unit(double angle) { return {std::cos(angle), std::sin(angle)}; }

// (sin, -cos): the heading turned a quarter clockwise.
Vec2 clockwise_normal(double angle) { return {std::sin(angle), -std::cos(angle)}; }

Vec2 neighbor_mean(std::span<const Vec2> grads) {
  Vec2 sum = Vec2::Zero();
  for (const Vec2& g : grads) {
    sum += g;
  }
  return sum / static_cast<double>(grads.size());
}

}  // namespace

KinematicInput source_seeking(double theta, const Vec2& grad, const ControlGains& gains) {
  const Vec2 o = unit(theta);
  const Vec2 perp(-grad.y(), grad.x());
  return {gains.k_v * o.dot(grad), -gains.k_omega * o.dot(perp)};
}

std::optional<FlockingError> flocking_error(const Vec2& own_grad_at_offset,
                                            std::span<const Vec2> neighbor_grads, double d_star) {
  if (neighbor_grads.empty()) {
    return std::nullopt;
  }
  const Vec2 diff = neighbor_mean(neighbor_grads) - own_grad_at_offset;
  FlockingError out;
  out.mu = diff.norm();
  out.e = out.mu - d_star;
  out.beta_defined = out.mu > 0.0;
  out.beta = out.beta_defined ? std::atan2(diff.y(), diff.x()) : 0.0;
  return out;
}

std::optional<VectorFlockingError> flocking_error_vector(const Vec2& own_grad, double theta,
                                                         std::span<const Vec2> neighbor_grads,
                                                         double d_star) {
  if (neighbor_grads.empty()) {
    return std::nullopt;
  }
  VectorFlockingError out;
  out.mu_vec = neighbor_mean(neighbor_grads) - own_grad;
  out.e_vec = out.mu_vec - d_star * unit(theta);
  return out;
}

KinematicInput flocking_unconstrained(const AgentState& own, const FlockingError& err,
                                      const Mat2& own_hess, std::span<const NeighborReport> neighbors,
                                      const ControlGains& gains) {
  const double det = own_hess.determinant();
  if (!(std::abs(det) > 0.0) || !std::isfinite(det)) {
    throw std::invalid_argument("flocking_unconstrained: singular Hessian");
  }
  const Mat2 hess_inv = own_hess.inverse();
  const Vec2 o_err = err.beta_defined ? unit(err.beta) : Vec2::Zero();

  // Desired offset-point velocity; (v, omega) are its coordinates in the
  // (heading, d * normal) frame.
  Vec2 target = gains.K_f * err.e * (hess_inv * o_err);
  if (!neighbors.empty()) {
    Vec2 feedforward = Vec2::Zero();
    for (const NeighborReport& k : neighbors) {
      feedforward += k.v * (hess_inv * (k.hess * unit(k.theta)));
    }
    target += feedforward / static_cast<double>(neighbors.size());
  }
  return {unit(own.theta).dot(target), -clockwise_normal(own.theta).dot(target) / gains.d_offset};
}

KinematicInput flocking_constrained(const AgentState& own, const VectorFlockingError& err,
                                    const Mat2& own_hess, std::span<const NeighborReport> neighbors,
                                    const ControlGains& gains) {
  const Vec2 o = unit(own.theta);
  const Vec2 s = clockwise_normal(own.theta);
  Mat2 rot;
  rot << 0.0, 1.0, -1.0, 0.0;
  const Mat2 q = rot * own_hess * rot;
  const double denom = o.dot(own_hess * o);

  double v = gains.k1 * err.e_vec.dot(own_hess * o);
  double omega = -gains.k2 / gains.d_star * err.e_vec.dot(s);
  if (!neighbors.empty()) {
    double v_ff = 0.0;
    double w_ff = 0.0;
    for (const NeighborReport& k : neighbors) {
      const Vec2 moved = k.hess * unit(k.theta);
      v_ff += k.v * o.dot(moved) / denom;
      w_ff += k.v / gains.d_star * s.dot(q * moved) / denom;
    }
    const double n = static_cast<double>(neighbors.size());
    v += v_ff / n;
    omega += w_ff / n;
  }
  return {v, omega};
}

double reference_acceleration(double v_now, std::optional<double> v_prev, double dt) {
  if (!v_prev) {
    return 0.0;
  }
  return (v_now - *v_prev) / dt;
}

double source_lyapunov(const ScalarField& field, const AgentState& s) {
  const double c = std::cos(s.theta);
  const double sn = std::sin(s.theta);
  return field.max_value() - field.eval(s.position()) + 0.5 * c * c + 0.5 * sn * sn;
}

}  // namespace flock
