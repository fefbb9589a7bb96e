#include "flock/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace flock::qp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// All constraints in the unified form a . z >= b.
struct Constraints {
  std::vector<Eigen::VectorXd> a;
  std::vector<double> b;
  std::vector<std::size_t> id;  // external index (see Solution::active_set)
};

Constraints flatten(const Problem& p) {
  const auto n = p.z_ref.size();
  Constraints c;
  for (std::size_t k = 0; k < p.rows.size(); ++k) {
    c.a.push_back(p.rows[k].a);
    c.b.push_back(p.rows[k].b);
    c.id.push_back(k);
  }
  for (std::size_t k = 0; k < p.boxes.size(); ++k) {
    const Box& box = p.boxes[k];
    if (std::isfinite(box.lower)) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
      e(static_cast<Eigen::Index>(box.index)) = 1.0;
      c.a.push_back(e);
      c.b.push_back(box.lower);
      c.id.push_back(p.rows.size() + 2 * k);
    }
    if (std::isfinite(box.upper)) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
      e(static_cast<Eigen::Index>(box.index)) = -1.0;
      c.a.push_back(e);
      c.b.push_back(-box.upper);
      c.id.push_back(p.rows.size() + 2 * k + 1);
    }
  }
  return c;
}

void validate(const Problem& p) {
  const auto n = p.z_ref.size();
  if (n < 1) {
    throw std::invalid_argument("qp: empty decision vector");
  }
  if (!p.z_ref.allFinite()) {
    throw std::invalid_argument("qp: non-finite reference");
  }
  for (const Row& r : p.rows) {
    if (r.a.size() != n) {
      throw std::invalid_argument("qp: row dimension mismatch");
    }
    if (!r.a.allFinite() || !std::isfinite(r.b)) {
      throw std::invalid_argument("qp: non-finite row");
    }
  }
  for (const Box& b : p.boxes) {
    if (b.index >= static_cast<std::size_t>(n)) {
      throw std::invalid_argument("qp: box index out of range");
    }
    if (std::isnan(b.lower) || std::isnan(b.upper) || b.lower > b.upper) {
      throw std::invalid_argument("qp: malformed box");
    }
  }
}

double violation_tolerance(const Eigen::VectorXd& a, double b, const Eigen::VectorXd& z) {
  return 1e-12 * std::max({1.0, std::abs(b), a.norm() * z.norm()});
}

}  // namespace

Solution solve(const Problem& p) {
  validate(p);
  const Constraints c = flatten(p);
  const auto n = p.z_ref.size();
  const std::size_t m = c.a.size();

  Eigen::VectorXd x = p.z_ref;
  std::vector<std::size_t> active;  // positions in c
  std::vector<double> u;
  std::vector<bool> in_active(m, false);

  Solution sol;
  const int max_iter = 50 * static_cast<int>(m + static_cast<std::size_t>(n) + 1);
  int iter = 0;

  auto slack = [&](std::size_t k) { return c.a[k].dot(x) - c.b[k]; };

  while (true) {
    std::size_t p_idx = m;
    for (std::size_t k = 0; k < m; ++k) {
      if (!in_active[k] && slack(k) < -violation_tolerance(c.a[k], c.b[k], x)) {
        p_idx = k;
        break;
      }
    }
    if (p_idx == m) {
      sol.status = Status::optimal;
      break;
    }

    const Eigen::VectorXd& np = c.a[p_idx];
    double u_plus = 0.0;
    bool added = false;
    bool infeasible = false;
    while (!added) {
      if (++iter > max_iter) {
        throw std::runtime_error("qp: iteration limit exceeded");
      }
      const auto q = static_cast<Eigen::Index>(active.size());
      Eigen::VectorXd r(q);
      Eigen::VectorXd z = np;
      if (q > 0) {
        Eigen::MatrixXd nmat(n, q);
        for (Eigen::Index j = 0; j < q; ++j) {
          nmat.col(j) = c.a[active[static_cast<std::size_t>(j)]];
        }
        r = nmat.householderQr().solve(np);
        z = np - nmat * r;
      }

      double t1 = kInf;
      std::size_t drop = active.size();
      for (std::size_t j = 0; j < active.size(); ++j) {
        if (r(static_cast<Eigen::Index>(j)) > 1e-14) {
          const double ratio = u[j] / r(static_cast<Eigen::Index>(j));
          if (ratio < t1) {
            t1 = ratio;
            drop = j;
          }
        }
      }
      const double zz = z.dot(np);
      double t2 = kInf;
      if (z.squaredNorm() > 1e-14 * np.squaredNorm() && zz > 0.0) {
        t2 = -slack(p_idx) / zz;
      }
      const double t = std::min(t1, t2);
      if (!std::isfinite(t)) {
        infeasible = true;
        break;
      }
      for (std::size_t j = 0; j < active.size(); ++j) {
        u[j] -= t * r(static_cast<Eigen::Index>(j));
      }
      u_plus += t;
      if (std::isfinite(t2)) {
        x += t * z;
      }
      if (std::isfinite(t2) && t2 <= t1) {
        active.push_back(p_idx);
        u.push_back(u_plus);
        in_active[p_idx] = true;
        added = true;
      } else {
        in_active[active[drop]] = false;
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(drop));
        u.erase(u.begin() + static_cast<std::ptrdiff_t>(drop));
      }
    }
    if (infeasible) {
      sol.status = Status::infeasible;
      break;
    }
  }

  sol.z_star = x;
  sol.iterations = iter;
  for (std::size_t j = 0; j < active.size(); ++j) {
    sol.active_set.push_back(c.id[active[j]]);
    sol.multipliers.push_back(u[j]);
  }
  if (sol.status == Status::optimal) {
    Eigen::VectorXd station = x - p.z_ref;
    double worst = 0.0;
    for (std::size_t j = 0; j < active.size(); ++j) {
      station -= u[j] * c.a[active[j]];
      worst = std::max({worst, -u[j], std::abs(u[j] * slack(active[j]))});
    }
    for (std::size_t k = 0; k < m; ++k) {
      worst = std::max(worst, -slack(k));
    }
    sol.kkt_residual = std::max(worst, station.lpNorm<Eigen::Infinity>());
  } else {
    sol.kkt_residual = kInf;
  }
  return sol;
}

Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  const auto n = a.cols();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  if (n == 0) {
    return x;
  }
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  const double tol = 1e-12 * std::max(1.0, a.norm() * b.norm());

  auto solve_passive = [&](Eigen::VectorXd& s) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (passive[static_cast<std::size_t>(j)]) {
        idx.push_back(j);
      }
    }
    s = Eigen::VectorXd::Zero(n);
    if (idx.empty()) {
      return;
    }
    Eigen::MatrixXd ap(a.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      ap.col(static_cast<Eigen::Index>(k)) = a.col(idx[k]);
    }
    const Eigen::VectorXd sp = ap.completeOrthogonalDecomposition().solve(b);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      s(idx[k]) = sp(static_cast<Eigen::Index>(k));
    }
  };

  for (int outer = 0; outer < 3 * n + 10; ++outer) {
    const Eigen::VectorXd w = a.transpose() * (b - a * x);
    Eigen::Index best = -1;
    double best_w = tol;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && w(j) > best_w) {
        best_w = w(j);
        best = j;
      }
    }
    if (best < 0) {
      break;
    }
    passive[static_cast<std::size_t>(best)] = true;
    Eigen::VectorXd s;
    for (int inner = 0; inner < 3 * n + 10; ++inner) {
      solve_passive(s);
      double alpha = 1.0;
      bool feasible = true;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && s(j) <= 0.0) {
          feasible = false;
          const double denom = x(j) - s(j);
          if (denom > 0.0) {
            alpha = std::min(alpha, x(j) / denom);
          }
        }
      }
      if (feasible) {
        break;
      }
      x += alpha * (s - x);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && x(j) <= 1e-15) {
          passive[static_cast<std::size_t>(j)] = false;
          x(j) = 0.0;
        }
      }
    }
    x = s;
  }
  return x;
}

double verify_kkt(const Problem& p, const Eigen::VectorXd& z) {
  const Constraints c = flatten(p);
  const auto n = p.z_ref.size();
  double primal = 0.0;
  std::vector<std::size_t> tight;
  std::vector<double> slacks;
  for (std::size_t k = 0; k < c.a.size(); ++k) {
    const double s = c.a[k].dot(z) - c.b[k];
    primal = std::max(primal, -s);
    if (std::abs(s) <= 1e-9 * std::max(1.0, std::abs(c.b[k]))) {
      tight.push_back(k);
      slacks.push_back(s);
    }
  }
  const Eigen::VectorXd step = z - p.z_ref;
  Eigen::MatrixXd nmat(n, static_cast<Eigen::Index>(tight.size()));
  for (std::size_t j = 0; j < tight.size(); ++j) {
    nmat.col(static_cast<Eigen::Index>(j)) = c.a[tight[j]];
  }
  const Eigen::VectorXd mult = nnls(nmat, step);
  const double station = (step - nmat * mult).lpNorm<Eigen::Infinity>();
  double compl_slack = 0.0;
  for (std::size_t j = 0; j < tight.size(); ++j) {
    compl_slack = std::max(compl_slack, std::abs(mult(static_cast<Eigen::Index>(j)) * slacks[j]));
  }
  return std::max({primal, station, compl_slack});
}

}  // namespace flock::qp
