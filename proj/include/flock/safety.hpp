#pragma once

#include "flock/dynamics.hpp"
#include "flock/environment.hpp"

#include <optional>
#include <span>

namespace flock {

struct SafetyParams {
  /// Obstacle margin (length).
  double d1{0.2};
  /// Speed weight in the obstacle projection term (time/length).
  double d2{0.05};
  /// Minimum inter-agent gradient distance.
  double d_r{0.1};
  /// Communication range in gradient units.
  double r{10.0};
  /// Slope of the class-K function alpha(h) = kappa * h.
  double kappa{1.0};
};

/// Inter-agent barrier shape. `connectivity` keeps mu in (d_r, r);
/// `separation` only keeps mu > d_r and is used with a fixed graph.
enum class PairBarrier { connectivity, separation };

/// Row coeff_u . u + coeff_gamma * gamma + offset >= 0 over u = (a, omega).
/// A row without coeff_gamma cannot be relaxed.
struct LinearConstraint {
  Eigen::Vector2d coeff_u{Eigen::Vector2d::Zero()};
  std::optional<double> coeff_gamma;
  double offset{0.0};
};

struct LieDerivatives {
  double lf{0.0};
  Eigen::Vector2d lg{Eigen::Vector2d::Zero()};
};

struct ObstacleBarrier {
  std::size_t obstacle{0};
  double h{0.0};
  LieDerivatives lie;
  LinearConstraint constraint;
};

struct PairBarrierResult {
  double h{0.0};
  double mu{0.0};
  LieDerivatives lie;
  LinearConstraint constraint;
  /// mu outside the admissible interval at evaluation time.
  bool set_violated{false};
};

// Barrier values. Throw std::domain_error where the bearing is undefined.
double obstacle_barrier_value(const ExtendedState& xi, const Obstacle& obstacle, const SafetyParams& params);
double pair_barrier_value(const ExtendedState& xi, const ExtendedState& xj, const ScalarField& field,
                          const SafetyParams& params, PairBarrier kind = PairBarrier::connectivity);

// Analytic gradients with respect to the own extended state.
Vec5 obstacle_barrier_gradient(const ExtendedState& xi, const Obstacle& obstacle, const SafetyParams& params);
Vec5 pair_barrier_gradient(const ExtendedState& xi, const ExtendedState& xj, const ScalarField& field,
                           const SafetyParams& params, PairBarrier kind = PairBarrier::connectivity);

/// Contracts a state gradient with f(xi) and g(xi).
LieDerivatives lie_derivatives(const Vec5& grad_h, const ExtendedState& xi);

/// Barrier against the closest obstacle; std::nullopt when there are none.
std::optional<ObstacleBarrier> obstacle_barrier(const ExtendedState& xi, std::span<const Obstacle> obstacles,
                                                const SafetyParams& params);

/// Barrier for the pair (i, j) with the row for agent i's input only; the
/// matching row for j comes from swapping the arguments.
PairBarrierResult connectivity_barrier(const ExtendedState& xi, const ExtendedState& xj,
                                       const ScalarField& field, const SafetyParams& params,
                                       PairBarrier kind = PairBarrier::connectivity);

}  // namespace flock
