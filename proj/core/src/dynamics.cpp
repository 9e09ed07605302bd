#include "tslab/dynamics.hpp"

#include <cmath>

#include "tslab/errors.hpp"

namespace tslab {

IncrementLine increment_line(const BanditProblem& problem, ActionIndex a) {
  const auto& models = problem.models();
  const int m = models.num_models();
  const double var = models.sigma() * models.sigma();
  const double ref = models.mean(m - 1, a);
  IncrementLine line{Eigen::VectorXd(m - 1), Eigen::VectorXd(m - 1)};
  for (int k = 0; k < m - 1; ++k) {
    const double mu = models.mean(k, a);
    line.slope(k) = (mu - ref) / var;
    line.intercept(k) = (ref * ref - mu * mu) / (2.0 * var);
  }
  return line;
}

Eigen::VectorXd log_likelihood_increment(const BanditProblem& problem, ActionIndex a, double reward) {
  IncrementLine line = increment_line(problem, a);
  return line.intercept + line.slope * reward;
}

Belief bayes_update(const Belief& b, const BanditProblem& problem, ActionIndex a, double reward) {
  const int m = b.size();
  Eigen::VectorXd log_post(m);
  for (int i = 0; i < m; ++i) {
    log_post(i) = (b[i] > 0.0 ? std::log(b[i]) : -INFINITY) + problem.models().log_density(i, a, reward);
  }
  if (!std::isfinite(log_post.maxCoeff())) throw NumericalUnderflow("all posterior weights underflowed");
  return Belief(normalize_log_weights(log_post));
}

}  // namespace tslab
