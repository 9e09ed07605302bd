#include "tslab/belief.hpp"

#include <cmath>
#include <string>

#include "tslab/errors.hpp"

namespace tslab {

Belief::Belief(Eigen::VectorXd probs) : probs_(std::move(probs)) {
  if (probs_.size() < 1) throw InvalidBelief("belief must have at least one entry");
  for (Eigen::Index i = 0; i < probs_.size(); ++i) {
    if (!std::isfinite(probs_(i)) || probs_(i) < 0.0) {
      throw InvalidBelief("belief entry " + std::to_string(i + 1) + " is negative or not finite");
    }
  }
  if (std::abs(probs_.sum() - 1.0) > kTolSum) {
    throw InvalidBelief("belief does not sum to one (sum = " + std::to_string(probs_.sum()) + ")");
  }
}

Belief Belief::uniform(int num_models) {
  return Belief(Eigen::VectorXd::Constant(num_models, 1.0 / num_models));
}

bool Belief::interior() const noexcept { return (probs_.array() > 0.0).all(); }

Eigen::VectorXd normalize_log_weights(const Eigen::VectorXd& log_weights) {
  const double shift = log_weights.maxCoeff();
  if (!std::isfinite(shift)) throw NumericalUnderflow("no finite log weight to normalise");
  Eigen::VectorXd w = (log_weights.array() - shift).exp();
  w /= w.sum();
  return w;
}

Belief softmax(const LogOdds& s) {
  const int m = s.num_models();
  Eigen::VectorXd logits(m);
  logits.head(m - 1) = s.values;
  logits(m - 1) = 0.0;
  Eigen::VectorXd p = normalize_log_weights(logits);
  // Re-normalise once more so the sum tolerance holds even after rounding.
  p /= p.sum();
  return Belief(std::move(p));
}

LogOdds to_log_odds(const Belief& b) {
  const int m = b.size();
  for (int i = 0; i < m; ++i) {
    if (b[i] <= kFloorEps) {
      throw BoundaryBelief("belief entry " + std::to_string(i + 1) + " is on the simplex boundary");
    }
  }
  LogOdds s{Eigen::VectorXd(m - 1)};
  const double log_ref = std::log(b[m - 1]);
  for (int k = 0; k < m - 1; ++k) s.values(k) = std::log(b[k]) - log_ref;
  return s;
}

Eigen::MatrixXd softmax_jacobian(const Belief& b) {
  const int m = b.size();
  Eigen::MatrixXd jac(m, m - 1);
  for (int i = 0; i < m; ++i) {
    for (int k = 0; k < m - 1; ++k) {
      jac(i, k) = (i == k) ? b[i] * (1.0 - b[i]) : -b[i] * b[k];
    }
  }
  return jac;
}

}  // namespace tslab
