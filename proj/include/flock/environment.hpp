#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace flock {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Concave quadratic signal field J(p) = -(p - c)^T H (p - c).
///
/// H must be symmetric positive-definite, so J is strictly concave with its
/// unique maximum J* = 0 at the source c. Gradients are returned as column
/// vectors holding the row-vector components (dJ/dx, dJ/dy).
class ScalarField {
public:
  ScalarField();
  /// Throws std::invalid_argument unless H is symmetric positive-definite.
  explicit ScalarField(const Mat2& hessian_matrix, const Vec2& center = Vec2::Zero());

  double eval(const Vec2& p) const;
  Vec2 gradient(const Vec2& p) const;
  /// Constant -2H for the quadratic family.
  Mat2 hessian(const Vec2& p) const;

  double max_value() const { return 0.0; }
  const Vec2& source() const { return center_; }
  const Mat2& shape() const { return h_; }

private:
  Mat2 h_;
  Vec2 center_;
};

/// Open disk; agents must remain strictly outside.
struct Obstacle {
  Vec2 center{Vec2::Zero()};
  double radius{1.0};
};

struct ObstacleHit {
  std::size_t index;
  /// Signed distance to the disk boundary (negative inside).
  double distance;
};

/// Closest obstacle boundary to p. Ties go to the lowest index.
/// Returns std::nullopt when there are no obstacles.
std::optional<ObstacleHit> closest_obstacle(const Vec2& p, std::span<const Obstacle> obstacles);

/// Signed distance from p to one obstacle boundary.
double boundary_distance(const Vec2& p, const Obstacle& obstacle);

}  // namespace flock
