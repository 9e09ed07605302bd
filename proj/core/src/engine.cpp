#include "tslab/engine.hpp"

#include <cmath>
#include <stdexcept>

#include "tslab/dynamics.hpp"

namespace tslab {

ThompsonSampler::ThompsonSampler(const BanditProblem& problem, RngStream rng)
    : num_models_(problem.num_models()),
      g_(problem.env().g),
      regret_(problem.num_actions()),
      sigma_true_(problem.env().sigma_true),
      log_odds_(to_log_odds(problem.prior()).values),
      weights_(problem.num_models()),
      rng_(rng) {
  prescribed_.reserve(num_models_);
  for (int m = 0; m < num_models_; ++m) prescribed_.push_back(optimal_action(problem.models(), m));
  for (int a = 0; a < problem.num_actions(); ++a) {
    IncrementLine line = increment_line(problem, a);
    intercepts_.push_back(std::move(line.intercept));
    slopes_.push_back(std::move(line.slope));
    regret_(a) = per_period_regret(problem.env(), a);
  }
}

void ThompsonSampler::belief_into(Eigen::VectorXd& out) const {
  const int m = num_models_;
  out.resize(m);
  double shift = 0.0;
  for (int k = 0; k < m - 1; ++k) shift = std::max(shift, log_odds_(k));
  double total = 0.0;
  for (int k = 0; k < m - 1; ++k) {
    out(k) = std::exp(log_odds_(k) - shift);
    total += out(k);
  }
  out(m - 1) = std::exp(-shift);
  total += out(m - 1);
  out /= total;
}

Belief ThompsonSampler::belief() const {
  Eigen::VectorXd p;
  belief_into(p);
  p /= p.sum();
  return Belief(std::move(p));
}

ModelIndex ThompsonSampler::sample_model() {
  const int m = num_models_;
  double shift = 0.0;
  for (int k = 0; k < m - 1; ++k) shift = std::max(shift, log_odds_(k));
  double total = 0.0;
  for (int k = 0; k < m - 1; ++k) {
    weights_(k) = std::exp(log_odds_(k) - shift);
    total += weights_(k);
  }
  weights_(m - 1) = std::exp(-shift);
  total += weights_(m - 1);

  const double target = rng_.uniform() * total;
  double cum = 0.0;
  for (int k = 0; k < m; ++k) {
    cum += weights_(k);
    if (target < cum) return k;
  }
  // Rounding can leave target == total; fall back to the last positive weight.
  for (int k = m - 1; k >= 0; --k) {
    if (weights_(k) > 0.0) return k;
  }
  return m - 1;
}

ThompsonSampler::Step ThompsonSampler::step() {
  const ModelIndex model = sample_model();
  const ActionIndex a = prescribed_[model];
  const double r = g_(a) + sigma_true_ * rng_.normal();
  log_odds_.noalias() += intercepts_[a] + slopes_[a] * r;
  return Step{model, a, r, regret_(a)};
}

Trajectory run_episode(const BanditProblem& problem, int horizon, RngStream rng, const EpisodeOptions& options) {
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  if (options.belief_stride < 1) throw std::invalid_argument("belief_stride must be at least 1");

  Trajectory traj;
  traj.meta = TrajectoryMeta{rng.master_seed(), rng.stream_id(), horizon, problem.hash(),
                             std::string(RngStream::kAlgorithm), options.belief_stride};
  traj.sampled_model.reserve(horizon);
  traj.action.reserve(horizon);
  traj.reward.reserve(horizon);
  traj.instant_regret.reserve(horizon);

  ThompsonSampler sampler(problem, rng);
  for (int t = 0; t < horizon; ++t) {
    if (t % options.belief_stride == 0) {
      traj.belief_steps.push_back(t);
      traj.beliefs.push_back(sampler.belief());
    }
    const auto step = sampler.step();
    traj.sampled_model.push_back(step.sampled_model);
    traj.action.push_back(step.action);
    traj.reward.push_back(step.reward);
    traj.instant_regret.push_back(step.instant_regret);
  }
  traj.final_belief = sampler.belief();
  traj.final_log_odds = LogOdds{sampler.log_odds()};
  return traj;
}

std::vector<double> cumulative_regret(const std::vector<double>& instant_regret) {
  std::vector<double> out(instant_regret.size());
  double acc = 0.0;
  for (std::size_t t = 0; t < instant_regret.size(); ++t) {
    acc += instant_regret[t];
    out[t] = acc;
  }
  return out;
}

std::vector<double> cumulative_regret(const Trajectory& traj) { return cumulative_regret(traj.instant_regret); }

}  // namespace tslab
