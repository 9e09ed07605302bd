#pragma once

#include <Eigen/Core>

namespace tslab::lp {

enum class Status { Optimal, Infeasible, Unbounded };

struct Result {
  Status status = Status::Infeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
};

// Dense two-phase simplex with Bland's rule for
//
//   maximize c^T x  subject to  A x = b,  x >= 0.
//
// Intended for the small problems met here (tens of rows and columns).
Result maximize(const Eigen::VectorXd& c, const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                double tol = 1e-11);

}  // namespace tslab::lp
