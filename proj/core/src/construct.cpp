#include "tslab/construct.hpp"

#include <cmath>

#include "tslab/errors.hpp"

namespace tslab {

BanditProblem realize_vertex_drifts(const std::vector<Eigen::VectorXd>& targets, double offset, double margin) {
  const int m = static_cast<int>(targets.size());
  if (m < 2) throw WrongShape("need at least two drift vectors");
  if (!(offset > 0.0)) throw WrongShape("offset must be positive");
  for (const auto& d : targets) {
    if (d.size() != m - 1) throw WrongShape("every drift vector must have M-1 entries");
    if (offset * offset < 2.0 * d.maxCoeff()) throw WrongShape("offset too small for the requested drifts");
  }

  // delta(k, a): mean of model k minus mean of the reference model in column a.
  Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd h(m);
  for (int a = 0; a < m; ++a) {
    const Eigen::VectorXd& d = targets[a];
    const double lead = a < m - 1 ? d(a) : -d.sum();
    h(a) = lead >= 0.0 ? offset : -offset;
    for (int k = 0; k < m - 1; ++k) {
      const double root = std::sqrt(h(a) * h(a) - 2.0 * d(k));
      delta(k, a) = 2.0 * d(k) / (h(a) + std::copysign(root, h(a)));
    }
  }

  // c_a - c_r <= delta(r, r) - delta(r, a) - margin for every row r and a != r.
  Eigen::VectorXd c = Eigen::VectorXd::Zero(m);
  bool changed = true;
  for (int pass = 0; pass <= m && changed; ++pass) {
    changed = false;
    for (int r = 0; r < m; ++r) {
      for (int a = 0; a < m; ++a) {
        if (a == r) continue;
        const double bound = c(r) + delta(r, r) - delta(r, a) - margin;
        if (c(a) > bound) {
          c(a) = bound;
          changed = true;
        }
      }
    }
    if (changed && pass == m) throw WrongShape("no mean offsets make every model prefer its own action");
  }

  Eigen::MatrixXd means(m, m);
  Eigen::VectorXd g(m);
  for (int a = 0; a < m; ++a) {
    for (int k = 0; k < m; ++k) means(k, a) = c(a) + delta(k, a);
    g(a) = c(a) + h(a);
  }
  return BanditProblem(ModelClass(means, 1.0), TrueEnvironment(g, 1.0));
}

}  // namespace tslab
