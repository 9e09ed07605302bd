#include "tslab/lp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace tslab::lp {
namespace {

// Tableau rows 0..m-1 hold constraints with the right-hand side in the last
// column. `cost` holds reduced costs c_j - c_B B^{-1} A_j for the current
// objective; `value` the objective value.
struct Tableau {
  Eigen::MatrixXd rows;
  std::vector<int> basis;
  std::vector<bool> allowed;  // columns allowed to enter
  Eigen::VectorXd cost;
  double value = 0.0;

  int num_rows() const { return static_cast<int>(rows.rows()); }
  int num_cols() const { return static_cast<int>(rows.cols()) - 1; }

  void pivot(int r, int col) {
    rows.row(r) /= rows(r, col);
    for (int i = 0; i < num_rows(); ++i) {
      if (i != r && rows(i, col) != 0.0) rows.row(i) -= rows(i, col) * rows.row(r);
    }
    const double f = cost(col);
    if (f != 0.0) {
      cost -= f * rows.row(r).head(num_cols()).transpose();
      value += f * rows(r, num_cols());
    }
    basis[r] = col;
  }

  void set_objective(const Eigen::VectorXd& c) {
    cost = c;
    value = 0.0;
    for (int i = 0; i < num_rows(); ++i) {
      const double cb = c(basis[i]);
      if (cb != 0.0) {
        cost -= cb * rows.row(i).head(num_cols()).transpose();
        value += cb * rows(i, num_cols());
      }
    }
  }

  // Returns false when the objective is unbounded.
  bool optimize(double tol) {
    const int rhs = num_cols();
    for (int iter = 0; iter < 100000; ++iter) {
      int enter = -1;
      for (int j = 0; j < num_cols(); ++j) {
        if (allowed[j] && cost(j) > tol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < num_rows(); ++i) {
        if (rows(i, enter) > tol) {
          const double ratio = rows(i, rhs) / rows(i, enter);
          if (ratio < best - tol || (ratio <= best + tol && leave >= 0 && basis[i] < basis[leave])) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
    throw std::runtime_error("simplex iteration limit reached");
  }
};

}  // namespace

Result maximize(const Eigen::VectorXd& c, const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double tol) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  if (c.size() != n || b.size() != m) throw std::invalid_argument("lp::maximize: dimension mismatch");

  Tableau t;
  t.rows = Eigen::MatrixXd::Zero(m, n + m + 1);
  for (int i = 0; i < m; ++i) {
    const double sign = b(i) < 0.0 ? -1.0 : 1.0;
    t.rows.row(i).head(n) = sign * A.row(i);
    t.rows(i, n + i) = 1.0;
    t.rows(i, n + m) = sign * b(i);
  }
  t.basis.resize(m);
  for (int i = 0; i < m; ++i) t.basis[i] = n + i;
  t.allowed.assign(n + m, true);

  // Phase 1: maximise minus the sum of artificials.
  Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(n + m);
  phase1.tail(m).setConstant(-1.0);
  t.set_objective(phase1);
  t.optimize(tol);
  const double scale = 1.0 + b.cwiseAbs().maxCoeff();
  Result result;
  if (t.value < -1e-9 * scale) {
    result.status = Status::Infeasible;
    return result;
  }

  // Drive remaining artificials out of the basis; rows where that is
  // impossible are redundant and dropped.
  std::vector<int> keep;
  for (int i = 0; i < m; ++i) {
    if (t.basis[i] >= n) {
      int col = -1;
      for (int j = 0; j < n; ++j) {
        if (std::abs(t.rows(i, j)) > 1e-9) {
          col = j;
          break;
        }
      }
      if (col >= 0) t.pivot(i, col);
    }
  }
  for (int i = 0; i < m; ++i) {
    if (t.basis[i] < n) keep.push_back(i);
  }
  if (static_cast<int>(keep.size()) < m) {
    Eigen::MatrixXd reduced(keep.size(), t.rows.cols());
    std::vector<int> basis;
    for (std::size_t k = 0; k < keep.size(); ++k) {
      reduced.row(k) = t.rows.row(keep[k]);
      basis.push_back(t.basis[keep[k]]);
    }
    t.rows = std::move(reduced);
    t.basis = std::move(basis);
  }
  for (int j = n; j < n + m; ++j) t.allowed[j] = false;

  Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(n + m);
  phase2.head(n) = c;
  t.set_objective(phase2);
  if (!t.optimize(tol)) {
    result.status = Status::Unbounded;
    return result;
  }

  result.status = Status::Optimal;
  result.x = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < t.num_rows(); ++i) {
    if (t.basis[i] < n) result.x(t.basis[i]) = t.rows(i, t.num_cols());
  }
  result.objective = c.dot(result.x);
  return result;
}

}  // namespace tslab::lp
