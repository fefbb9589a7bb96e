#pragma once

#include "flock/dynamics.hpp"
#include "flock/environment.hpp"

#include <cstddef>
#include <optional>
#include <span>

namespace flock {

/// What an agent broadcasts to its neighbors each step.
struct NeighborReport {
  std::size_t id{0};
  /// Used only for the bearing terms of the inter-agent barrier.
  Vec2 position{Vec2::Zero()};
  double v{0.0};
  double theta{0.0};
  Vec2 grad{Vec2::Zero()};
  Mat2 hess{Mat2::Zero()};
};

struct ControlGains {
  double k_v{1.0};
  double k_omega{5.0};
  double K_f{4.0};
  double k1{2.0};
  double k2{10.0};
  double d_star{0.5};
  double d_offset{0.1};
};

enum class FlockingLaw { unconstrained, constrained };

/// Scalar flocking error e = mu - d_star with mu the distance between the
/// neighbor-average gradient and the own gradient, beta its direction.
struct FlockingError {
  double e{0.0};
  double beta{0.0};
  double mu{0.0};
  /// False when mu == 0; beta is then meaningless.
  bool beta_defined{false};
};

struct VectorFlockingError {
  Vec2 e_vec{Vec2::Zero()};
  Vec2 mu_vec{Vec2::Zero()};
};

/// Projected gradient ascent: v = k_v <o, grad>, omega = -k_omega <o, grad_perp>
/// with grad_perp = (-g_y, g_x).
KinematicInput source_seeking(double theta, const Vec2& grad, const ControlGains& gains);

/// std::nullopt when the neighbor list is empty (fragmented agent).
std::optional<FlockingError> flocking_error(const Vec2& own_grad_at_offset,
                                            std::span<const Vec2> neighbor_grads, double d_star);

std::optional<VectorFlockingError> flocking_error_vector(const Vec2& own_grad, double theta,
                                                         std::span<const Vec2> neighbor_grads,
                                                         double d_star);

/// Offset-point flocking law driving the scalar error to zero at rate K_f.
///
/// The error direction is (cos beta, sin beta), replaced by zero when beta is
/// undefined so only the velocity-matching feedforward remains. Throws
/// std::invalid_argument if own_hess is singular.
KinematicInput flocking_unconstrained(const AgentState& own, const FlockingError& err,
                                      const Mat2& own_hess, std::span<const NeighborReport> neighbors,
                                      const ControlGains& gains);

/// Orientation-constrained flocking law; drives the error vector to zero and
/// aligns the heading with the gradient-difference direction.
KinematicInput flocking_constrained(const AgentState& own, const VectorFlockingError& err,
                                    const Mat2& own_hess, std::span<const NeighborReport> neighbors,
                                    const ControlGains& gains);

/// Backward difference of a speed signal; zero when there is no previous value.
double reference_acceleration(double v_now, std::optional<double> v_prev, double dt);

/// J* - J(p) + (cos^2 + sin^2) / 2 for one agent.
double source_lyapunov(const ScalarField& field, const AgentState& s);

}  // namespace flock
