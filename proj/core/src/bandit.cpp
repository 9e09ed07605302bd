#include "tslab/bandit.hpp"

#include <cmath>
#include <cstring>
#include <numbers>
#include <string>

#include "tslab/errors.hpp"

namespace tslab {
namespace {

void require_finite(const Eigen::MatrixXd& values, const std::string& field) {
  if (!values.allFinite()) throw InvalidProblem(field, "all entries must be finite");
}

class Fnv1a {
 public:
  void add(const void* data, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      state_ ^= bytes[i];
      state_ *= 1099511628211ULL;
    }
  }
  void add(double v) { add(&v, sizeof v); }
  void add(std::int64_t v) { add(&v, sizeof v); }
  std::uint64_t value() const { return state_; }

 private:
  std::uint64_t state_ = 14695981039346656037ULL;
};

}  // namespace

ModelClass::ModelClass(Eigen::MatrixXd means, double sigma) : means_(std::move(means)), sigma_(sigma) {
  if (means_.rows() < 2) throw InvalidProblem("models", "at least two models are required");
  if (means_.cols() < 2) throw InvalidProblem("models", "at least two actions are required");
  require_finite(means_, "models");
  if (!(sigma_ > 0.0) || !std::isfinite(sigma_)) throw InvalidProblem("sigma", "must be a positive finite number");
}

double ModelClass::log_density(ModelIndex m, ActionIndex a, double reward) const {
  const double z = (reward - means_(m, a)) / sigma_;
  return -0.5 * z * z - std::log(sigma_) - 0.5 * std::log(2.0 * std::numbers::pi);
}

TrueEnvironment::TrueEnvironment(Eigen::VectorXd g_in, double sigma_true_in)
    : g(std::move(g_in)), sigma_true(sigma_true_in) {
  if (g.size() < 2) throw InvalidProblem("true_means", "at least two actions are required");
  require_finite(g, "true_means");
  if (!(sigma_true > 0.0) || !std::isfinite(sigma_true)) {
    throw InvalidProblem("sigma_true", "must be a positive finite number");
  }
}

BanditProblem::BanditProblem(ModelClass models, TrueEnvironment env, Belief prior)
    : models_(std::move(models)), env_(std::move(env)), prior_(std::move(prior)) {
  if (env_.num_actions() != models_.num_actions()) {
    throw InvalidProblem("true_means", "length " + std::to_string(env_.num_actions()) +
                                           " does not match the number of actions " +
                                           std::to_string(models_.num_actions()));
  }
  if (prior_.size() != models_.num_models()) {
    throw InvalidProblem("prior", "length does not match the number of models");
  }
  if (!prior_.interior()) throw InvalidProblem("prior", "every model needs positive prior mass");
}

BanditProblem::BanditProblem(ModelClass models, TrueEnvironment env)
    : BanditProblem(models, std::move(env), Belief::uniform(models.num_models())) {}

std::uint64_t BanditProblem::hash() const {
  Fnv1a h;
  h.add(static_cast<std::int64_t>(num_models()));
  h.add(static_cast<std::int64_t>(num_actions()));
  for (int m = 0; m < num_models(); ++m) {
    for (int a = 0; a < num_actions(); ++a) h.add(models_.mean(m, a));
  }
  h.add(models_.sigma());
  for (int a = 0; a < num_actions(); ++a) h.add(env_.g(a));
  h.add(env_.sigma_true);
  for (int m = 0; m < num_models(); ++m) h.add(prior_[m]);
  return h.value();
}

ActionIndex optimal_action(const ModelClass& models, ModelIndex m) {
  ActionIndex best = 0;
  for (ActionIndex a = 1; a < models.num_actions(); ++a) {
    if (models.mean(m, a) > models.mean(m, best)) best = a;
  }
  return best;
}

ActionIndex oracle_action(const TrueEnvironment& env) {
  ActionIndex best = 0;
  for (ActionIndex a = 1; a < env.num_actions(); ++a) {
    if (env.g(a) > env.g(best)) best = a;
  }
  return best;
}

double per_period_regret(const TrueEnvironment& env, ActionIndex a) {
  return env.g(oracle_action(env)) - env.g(a);
}

bool is_misspecified(const BanditProblem& problem) {
  const auto& models = problem.models();
  const auto& env = problem.env();
  if (std::abs(models.sigma() - env.sigma_true) > kTolEq) return true;
  for (int m = 0; m < models.num_models(); ++m) {
    if ((models.means().row(m).transpose() - env.g).cwiseAbs().maxCoeff() <= kTolEq) return false;
  }
  return true;
}

}  // namespace tslab
