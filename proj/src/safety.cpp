#include "flock/safety.hpp"

#include <cmath>
#include <stdexcept>

namespace flock {

namespace {

// Unit vector from `from` to `to`, and the distance.
Vec2 bearing(const Vec2& from, const Vec2& to, double& dist) {
  const Vec2 rel = to - from;
  dist = rel.norm();
  if (!(dist > 0.0)) {
    throw std::domain_error("barrier: coincident positions");
  }
  return rel / dist;
}

// Projection of a heading onto the bearing from `from` to `to`.
double projection(const Vec2& heading, const Vec2& from, const Vec2& to) {
  double dist = 0.0;
  return heading.dot(bearing(from, to, dist));
}

struct PairGeometry {
  double mu;
  double d;
  double d_prime;  // dD/dmu
  Vec2 w;          // (grad_j - grad_i) / mu
};

PairGeometry pair_geometry(const ExtendedState& xi, const ExtendedState& xj, const ScalarField& field,
                           const SafetyParams& params, PairBarrier kind) {
  const Vec2 diff = field.gradient(xj.position()) - field.gradient(xi.position());
  PairGeometry g;
  g.mu = diff.norm();
  g.w = g.mu > 0.0 ? Vec2(diff / g.mu) : Vec2::Zero();
  if (kind == PairBarrier::connectivity) {
    g.d = (g.mu - params.d_r) * (params.r - g.mu);
    g.d_prime = params.r + params.d_r - 2.0 * g.mu;
  } else {
    g.d = g.mu - params.d_r;
    g.d_prime = 1.0;
  }
  return g;
}

}  // namespace

double obstacle_barrier_value(const ExtendedState& xi, const Obstacle& obstacle, const SafetyParams& params) {
  double rho = 0.0;
  const Vec2 u = bearing(xi.position(), obstacle.center, rho);
  const double d = rho - obstacle.radius - params.d1;
  const double p = xi.orientation().dot(u) + xi.v * params.d2;
  return d * std::exp(-p);
}

Vec5 obstacle_barrier_gradient(const ExtendedState& xi, const Obstacle& obstacle, const SafetyParams& params) {
  double rho = 0.0;
  const Vec2 u = bearing(xi.position(), obstacle.center, rho);
  const Vec2 q = xi.orientation();
  const double d = rho - obstacle.radius - params.d1;
  const double e = std::exp(-(q.dot(u) + xi.v * params.d2));
  const Mat2 tangent = Mat2::Identity() - u * u.transpose();

  const Vec2 dd_dp = -u;
  const Vec2 dp_dp = -(tangent * q) / rho;
  const double dp_dv = -q.dot(u) / xi.v + params.d2;
  const Vec2 dp_dvel = u / xi.v;

  Vec5 grad;
  grad.head<2>() = e * (dd_dp - d * dp_dp);
  grad(2) = -e * d * dp_dv;
  grad.tail<2>() = -e * d * dp_dvel;
  return grad;
}

double pair_barrier_value(const ExtendedState& xi, const ExtendedState& xj, const ScalarField& field,
                          const SafetyParams& params, PairBarrier kind) {
  const PairGeometry g = pair_geometry(xi, xj, field, params, kind);
  const double p_ij = projection(xi.orientation(), xi.position(), xj.position());
  const double p_ji = projection(xj.orientation(), xj.position(), xi.position());
  return g.d * (std::exp(-p_ij) + std::exp(-p_ji));
}

Vec5 pair_barrier_gradient(const ExtendedState& xi, const ExtendedState& xj, const ScalarField& field,
                           const SafetyParams& params, PairBarrier kind) {
  const PairGeometry g = pair_geometry(xi, xj, field, params, kind);
  double rho = 0.0;
  const Vec2 u = bearing(xi.position(), xj.position(), rho);
  const Vec2 oi = xi.orientation();
  const Vec2 oj = xj.orientation();
  const double e_ij = std::exp(-projection(oi, xi.position(), xj.position()));
  const double e_ji = std::exp(-projection(oj, xj.position(), xi.position()));
  const Mat2 tangent = Mat2::Identity() - u * u.transpose();

  const Vec2 dmu_dp = -(field.hessian(xi.position()).transpose() * g.w);
  const Vec2 dpij_dp = -(tangent * oi) / rho;
  const Vec2 dpji_dp = (tangent * oj) / rho;
  const double dpij_dv = -oi.dot(u) / xi.v;
  const Vec2 dpij_dvel = u / xi.v;

  Vec5 grad;
  grad.head<2>() = (e_ij + e_ji) * g.d_prime * dmu_dp - g.d * (e_ij * dpij_dp + e_ji * dpji_dp);
  grad(2) = -g.d * e_ij * dpij_dv;
  grad.tail<2>() = -g.d * e_ij * dpij_dvel;
  return grad;
}

LieDerivatives lie_derivatives(const Vec5& grad_h, const ExtendedState& xi) {
  LieDerivatives out;
  out.lf = grad_h.dot(extended_drift(xi));
  out.lg = extended_input_matrix(xi).transpose() * grad_h;
  return out;
}

std::optional<ObstacleBarrier> obstacle_barrier(const ExtendedState& xi, std::span<const Obstacle> obstacles,
                                                const SafetyParams& params) {
  const auto hit = closest_obstacle(xi.position(), obstacles);
  if (!hit) {
    return std::nullopt;
  }
  const Obstacle& obs = obstacles[hit->index];
  ObstacleBarrier out;
  out.obstacle = hit->index;
  out.h = obstacle_barrier_value(xi, obs, params);
  out.lie = lie_derivatives(obstacle_barrier_gradient(xi, obs, params), xi);
  out.constraint.coeff_u = out.lie.lg;
  out.constraint.offset = out.lie.lf + params.kappa * out.h;
  return out;
}

PairBarrierResult connectivity_barrier(const ExtendedState& xi, const ExtendedState& xj,
                                       const ScalarField& field, const SafetyParams& params, PairBarrier kind) {
  PairBarrierResult out;
  out.h = pair_barrier_value(xi, xj, field, params, kind);
  out.mu = (field.gradient(xj.position()) - field.gradient(xi.position())).norm();
  out.set_violated = !(out.mu > params.d_r) || (kind == PairBarrier::connectivity && !(out.mu < params.r));
  out.lie = lie_derivatives(pair_barrier_gradient(xi, xj, field, params, kind), xi);
  out.constraint.coeff_u = out.lie.lg;
  out.constraint.coeff_gamma = params.kappa * out.h;
  out.constraint.offset = out.lie.lf;
  return out;
}

}  // namespace flock
