#pragma once

#include <Eigen/Core>

#include "tslab/bandit.hpp"
#include "tslab/belief.hpp"

namespace tslab {

// Z^(k) = log f_k(r|a) - log f_M(r|a) for k = 1..M-1.
Eigen::VectorXd log_likelihood_increment(const BanditProblem& problem, ActionIndex a, double reward);

// Posterior after observing `reward` for action `a`, computed in log space.
Belief bayes_update(const Belief& b, const BanditProblem& problem, ActionIndex a, double reward);

// The Gaussian increment is affine in the reward: Z = intercept + slope * r.
struct IncrementLine {
  Eigen::VectorXd intercept;
  Eigen::VectorXd slope;
};

IncrementLine increment_line(const BanditProblem& problem, ActionIndex a);

}  // namespace tslab
