#include "flock/environment.hpp"

#include <cmath>
#include <stdexcept>

namespace flock {

ScalarField::ScalarField() : h_(Mat2::Identity()), center_(Vec2::Zero()) {}

ScalarField::ScalarField(const Mat2& hessian_matrix, const Vec2& center)
    : h_(hessian_matrix), center_(center) {
  if (!h_.allFinite() || !center_.allFinite()) {
    throw std::invalid_argument("field: non-finite entries");
  }
  if (h_(0, 1) != h_(1, 0)) {
    throw std::invalid_argument("field: H must be symmetric");
  }
  // 2x2 SPD test: positive leading minors.
  if (!(h_(0, 0) > 0.0) || !(h_.determinant() > 0.0)) {
    throw std::invalid_argument("field: H must be positive-definite");
  }
}

double ScalarField::eval(const Vec2& p) const {
  const Vec2 d = p - center_;
  return -d.dot(h_ * d);
}

Vec2 ScalarField::gradient(const Vec2& p) const { return -2.0 * (h_ * (p - center_)); }

Mat2 ScalarField::hessian(const Vec2& /*p*/) const { return -2.0 * h_; }

double boundary_distance(const Vec2& p, const Obstacle& obstacle) {
  return (p - obstacle.center).norm() - obstacle.radius;
}

std::optional<ObstacleHit> closest_obstacle(const Vec2& p, std::span<const Obstacle> obstacles) {
  if (obstacles.empty()) {
    return std::nullopt;
  }
  ObstacleHit best{0, boundary_distance(p, obstacles[0])};
  for (std::size_t k = 1; k < obstacles.size(); ++k) {
    const double d = boundary_distance(p, obstacles[k]);
    if (d < best.distance) {
      best = {k, d};
    }
  }
  return best;
}

}  // namespace flock
