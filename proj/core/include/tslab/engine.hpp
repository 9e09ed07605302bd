#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tslab/bandit.hpp"
#include "tslab/belief.hpp"
#include "tslab/rng.hpp"

namespace tslab {

// Incremental Thompson Sampling over a finite model class.
//
// The posterior is carried as log-odds against the reference model so that
// transient regimes, where |S| grows without bound, never divide by a
// vanishing probability.
class ThompsonSampler {
 public:
  struct Step {
    ModelIndex sampled_model;
    ActionIndex action;
    double reward;
    double instant_regret;
  };

  ThompsonSampler(const BanditProblem& problem, RngStream rng);

  // Draws a model from the current posterior, plays its optimal action,
  // observes a reward from the true environment and updates the posterior.
  Step step();

  const Eigen::VectorXd& log_odds() const noexcept { return log_odds_; }
  void set_log_odds(const Eigen::VectorXd& s) { log_odds_ = s; }
  Belief belief() const;
  // Same as belief() but written into a caller-owned buffer.
  void belief_into(Eigen::VectorXd& out) const;

  int num_models() const noexcept { return num_models_; }
  const std::vector<ActionIndex>& prescribed_actions() const noexcept { return prescribed_; }
  RngStream& rng() noexcept { return rng_; }

 private:
  ModelIndex sample_model();

  int num_models_;
  std::vector<ActionIndex> prescribed_;
  std::vector<Eigen::VectorXd> intercepts_;  // per action
  std::vector<Eigen::VectorXd> slopes_;      // per action
  Eigen::VectorXd g_;
  Eigen::VectorXd regret_;
  double sigma_true_;
  Eigen::VectorXd log_odds_;
  Eigen::VectorXd weights_;
  RngStream rng_;
};

struct TrajectoryMeta {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  int horizon = 0;
  std::uint64_t problem_hash = 0;
  std::string rng_algorithm;
  int belief_stride = 1;
};

// One Thompson Sampling run. Per-step series are full resolution; belief
// snapshots are kept every `belief_stride` steps (always including t = 0).
// beliefs[i] is the posterior used to sample at step belief_steps[i].
struct Trajectory {
  std::vector<ModelIndex> sampled_model;
  std::vector<ActionIndex> action;
  std::vector<double> reward;
  std::vector<double> instant_regret;
  std::vector<int> belief_steps;
  std::vector<Belief> beliefs;
  Belief final_belief{Eigen::VectorXd::Ones(1)};
  LogOdds final_log_odds;
  TrajectoryMeta meta;

  int horizon() const noexcept { return static_cast<int>(action.size()); }
};

struct EpisodeOptions {
  int belief_stride = 1;
};

Trajectory run_episode(const BanditProblem& problem, int horizon, RngStream rng,
                       const EpisodeOptions& options = {});

std::vector<double> cumulative_regret(const Trajectory& traj);
std::vector<double> cumulative_regret(const std::vector<double>& instant_regret);

}  // namespace tslab
