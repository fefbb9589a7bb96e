#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace flock::qp {

/// a . z >= b
struct Row {
  Eigen::VectorXd a;
  double b{0.0};
};

/// lower <= z[index] <= upper; infinite bounds are ignored.
struct Box {
  std::size_t index{0};
  double lower{0.0};
  double upper{0.0};
};

/// minimize 1/2 ||z - z_ref||^2 subject to rows and boxes.
struct Problem {
  Eigen::VectorXd z_ref;
  std::vector<Row> rows;
  std::vector<Box> boxes;
};

enum class Status { optimal, infeasible };

struct Solution {
  Eigen::VectorXd z_star;
  Status status{Status::optimal};
  /// Tight constraints. Indices below rows.size() are rows; box b maps to
  /// rows.size() + 2b (lower) and rows.size() + 2b + 1 (upper).
  std::vector<std::size_t> active_set;
  /// Multipliers aligned with active_set.
  std::vector<double> multipliers;
  double kkt_residual{0.0};
  int iterations{0};
};

/// Exact minimizer via a dual active-set iteration (Goldfarb-Idnani with an
/// identity Hessian). Starts at z_ref and adds the lowest-index violated
/// constraint each outer iteration, so the path is deterministic.
/// Throws std::invalid_argument on non-finite or malformed input.
Solution solve(const Problem& p);

/// Independent optimality check: the max of primal infeasibility, the
/// stationarity residual with nonnegative multipliers fitted on the tight
/// constraints, and complementary slackness.
double verify_kkt(const Problem& p, const Eigen::VectorXd& z);

/// Nonnegative least squares min ||A x - b|| s.t. x >= 0 (Lawson-Hanson).
Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b);

}  // namespace flock::qp
