#pragma once

// Reference implementations written straight from the defining formulas,
// sharing no code with the library beyond plain data types.

#include "flock/dynamics.hpp"
#include "flock/environment.hpp"
#include "flock/qp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>

namespace oracle {

using Vec2 = Eigen::Vector2d;
using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat2 = Eigen::Matrix2d;

/// xi = (x, y, v, xdot, ydot)
inline Vec5 drift(const Vec5& xi) { return (Vec5() << xi(3), xi(4), 0.0, 0.0, 0.0).finished(); }

inline Vec5 accel_column(const Vec5& xi) {
  return (Vec5() << 0.0, 0.0, 1.0, xi(3) / xi(2), xi(4) / xi(2)).finished();
}

inline Vec5 turn_column(const Vec5& xi) { return (Vec5() << 0.0, 0.0, 0.0, -xi(4), xi(3)).finished(); }

/// h = D exp(-P), D = |p - c| - R - d1, P = <o, (c - p)/|c - p|> + v d2.
inline double obstacle_h(const Vec5& xi, const Vec2& c, double radius, double d1, double d2) {
  const Vec2 p(xi(0), xi(1));
  const Vec2 o = Vec2(xi(3), xi(4)) / xi(2);
  const double rho = (c - p).norm();
  const double D = rho - radius - d1;
  const double P = o.dot((c - p) / rho) + xi(2) * d2;
  return D * std::exp(-P);
}

/// h_ij = D (exp(-P_ij) + exp(-P_ji)); D = (mu - d_r)(r - mu), or mu - d_r
/// when `upper` is false; mu = |grad_j - grad_i| with grad = -2 H (p - c).
inline double pair_h(const Vec5& xi, const Vec5& xj, const Mat2& H, const Vec2& c, double d_r, double r,
                     bool upper = true) {
  const Vec2 pi(xi(0), xi(1));
  const Vec2 pj(xj(0), xj(1));
  const Vec2 gi = -2.0 * H * (pi - c);
  const Vec2 gj = -2.0 * H * (pj - c);
  const double mu = (gj - gi).norm();
  const double D = upper ? (mu - d_r) * (r - mu) : mu - d_r;
  const Vec2 u = (pj - pi) / (pj - pi).norm();
  const Vec2 oi = Vec2(xi(3), xi(4)) / xi(2);
  const Vec2 oj = Vec2(xj(3), xj(4)) / xj(2);
  return D * (std::exp(-oi.dot(u)) + std::exp(oj.dot(u)));
}

/// Central difference of h along direction dir.
inline double directional(const std::function<double(const Vec5&)>& h, const Vec5& xi, const Vec5& dir) {
  const double n = dir.norm();
  if (n == 0.0) {
    return 0.0;
  }
  const double eps = 1e-6 * std::max(1.0, xi.norm()) / n;
  return (h(xi + eps * dir) - h(xi - eps * dir)) / (2.0 * eps);
}

/// Relative agreement with a floor tied to the size of h so exact zeros
/// are not judged against finite-difference noise.
inline bool close_rel(double analytic, double fd, double h_scale, double tol = 1e-4) {
  const double scale = std::max({std::abs(analytic), std::abs(fd), 1e-4 * (1.0 + std::abs(h_scale))});
  return std::abs(analytic - fd) <= tol * scale;
}

/// All constraints as rows a . z >= b.
struct Rows {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
};

inline Rows stack(const flock::qp::Problem& p) {
  const auto n = p.z_ref.size();
  std::vector<std::pair<Eigen::VectorXd, double>> rows;
  for (const auto& r : p.rows) {
    rows.emplace_back(r.a, r.b);
  }
  for (const auto& bx : p.boxes) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e(static_cast<Eigen::Index>(bx.index)) = 1.0;
    if (std::isfinite(bx.lower)) {
      rows.emplace_back(e, bx.lower);
    }
    if (std::isfinite(bx.upper)) {
      rows.emplace_back(-e, -bx.upper);
    }
  }
  Rows out{Eigen::MatrixXd(static_cast<Eigen::Index>(rows.size()), n),
           Eigen::VectorXd(static_cast<Eigen::Index>(rows.size()))};
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.a.row(static_cast<Eigen::Index>(k)) = rows[k].first.transpose();
    out.b(static_cast<Eigen::Index>(k)) = rows[k].second;
  }
  return out;
}

/// Exhaustive active-set enumeration: the minimizer of 1/2 |z - z_ref|^2 over
/// a polyhedron is the projection of z_ref onto the affine hull of some face,
/// so trying every linearly independent subset of constraints as equalities
/// and keeping the best feasible point gives the exact answer.
inline std::optional<Eigen::VectorXd> enumerate_qp(const flock::qp::Problem& p, double feas_tol = 1e-9) {
  const Rows c = stack(p);
  const auto m = c.a.rows();
  const auto n = p.z_ref.size();
  std::optional<Eigen::VectorXd> best;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index k = 0; k < m; ++k) {
      if (mask & (std::uint64_t{1} << k)) {
        idx.push_back(k);
      }
    }
    if (static_cast<Eigen::Index>(idx.size()) > n) {
      continue;
    }
    Eigen::VectorXd z = p.z_ref;
    if (!idx.empty()) {
      Eigen::MatrixXd as(static_cast<Eigen::Index>(idx.size()), n);
      Eigen::VectorXd bs(static_cast<Eigen::Index>(idx.size()));
      for (std::size_t k = 0; k < idx.size(); ++k) {
        as.row(static_cast<Eigen::Index>(k)) = c.a.row(idx[k]);
        bs(static_cast<Eigen::Index>(k)) = c.b(idx[k]);
      }
      const Eigen::MatrixXd gram = as * as.transpose();
      Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
      if (lu.rank() < gram.rows()) {
        continue;
      }
      z = p.z_ref + as.transpose() * lu.solve(bs - as * p.z_ref);
    }
    if (m > 0 && ((c.a * z - c.b).array() < -feas_tol).any()) {
      continue;
    }
    const double cost = 0.5 * (z - p.z_ref).squaredNorm();
    if (cost < best_cost) {
      best_cost = cost;
      best = z;
    }
  }
  return best;
}

/// Random SPD 2x2 matrix with eigenvalues in [lo, hi].
inline Mat2 random_spd(std::mt19937_64& rng, double lo = 0.2, double hi = 3.0) {
  std::uniform_real_distribution<double> eig(lo, hi);
  std::uniform_real_distribution<double> ang(-3.14159, 3.14159);
  const double a = ang(rng);
  Mat2 q;
  q << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  const Mat2 m = q * Eigen::Vector2d(eig(rng), eig(rng)).asDiagonal() * q.transpose();
  return 0.5 * (m + m.transpose());
}

inline Vec5 extended(double x, double y, double v, double theta) {
  return (Vec5() << x, y, v, v * std::cos(theta), v * std::sin(theta)).finished();
}

}  // namespace oracle
