#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "tslab/belief.hpp"

namespace tslab {

// Model and action indices are 0-based in code and 1-based in every file or
// console format.
using ModelIndex = int;
using ActionIndex = int;

inline constexpr double kTolEq = 1e-12;

// Finite class of Gaussian reward models sharing one standard deviation.
// Row m holds the per-action means of model m; the last row is the log-odds
// reference model.
class ModelClass {
 public:
  ModelClass(Eigen::MatrixXd means, double sigma);

  int num_models() const noexcept { return static_cast<int>(means_.rows()); }
  int num_actions() const noexcept { return static_cast<int>(means_.cols()); }
  const Eigen::MatrixXd& means() const noexcept { return means_; }
  double mean(ModelIndex m, ActionIndex a) const { return means_(m, a); }
  double sigma() const noexcept { return sigma_; }

  double log_density(ModelIndex m, ActionIndex a, double reward) const;

 private:
  Eigen::MatrixXd means_;
  double sigma_;
};

struct TrueEnvironment {
  TrueEnvironment(Eigen::VectorXd g, double sigma_true);

  int num_actions() const noexcept { return static_cast<int>(g.size()); }

  Eigen::VectorXd g;
  double sigma_true;
};

class BanditProblem {
 public:
  BanditProblem(ModelClass models, TrueEnvironment env, Belief prior);
  // Uniform prior.
  BanditProblem(ModelClass models, TrueEnvironment env);

  const ModelClass& models() const noexcept { return models_; }
  const TrueEnvironment& env() const noexcept { return env_; }
  const Belief& prior() const noexcept { return prior_; }
  int num_models() const noexcept { return models_.num_models(); }
  int num_actions() const noexcept { return models_.num_actions(); }

  // FNV-1a over the canonical binary layout of all parameters.
  std::uint64_t hash() const;

 private:
  ModelClass models_;
  TrueEnvironment env_;
  Belief prior_;
};

// Smallest action index attaining the row maximum.
ActionIndex optimal_action(const ModelClass& models, ModelIndex m);
ActionIndex oracle_action(const TrueEnvironment& env);
double per_period_regret(const TrueEnvironment& env, ActionIndex a);
bool is_misspecified(const BanditProblem& problem);

}  // namespace tslab
