#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "tslab/bandit.hpp"
#include "tslab/classifier.hpp"
#include "tslab/engine.hpp"

namespace tslab {

inline constexpr double kDefaultAbsorptionThreshold = 20.0;
inline constexpr double kDefaultEpsFace = 1e-3;
inline constexpr double kDefaultWindowFraction = 0.1;
inline constexpr double kDefaultBurnInFraction = 0.2;
inline constexpr int kDefaultBins = 50;
inline constexpr double kZ95 = 1.959963984540054;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// 95% normal-approximation interval for a binomial proportion.
Interval binomial_ci95(double p_hat, long n);

struct AbsorptionEstimate {
  double s_abs = kDefaultAbsorptionThreshold;
  int horizon_cap = 0;
  int reps = 0;
  double initial_log_odds = 0.0;
  int absorbed_count = 0;
  int absorbed_plus = 0;  // absorbed at the model-1 vertex
  int censored_count = 0;
  double p_hat = 0.0;     // absorbed_plus / absorbed_count; censored runs excluded
  Interval ci;
  double censored_fraction = 0.0;
  double mean_absorption_time = 0.0;
  // Largest distance to the nearest vertex over absorbed runs at absorption.
  double max_vertex_distance = 0.0;
  std::optional<double> p_star_mean_field;
};

struct StationaryEstimate {
  int burn_in = 0;
  int horizon = 0;
  int chains = 0;
  std::vector<double> bin_edges;
  // counts[k][b]: post burn-in visits of pi_k to bin b, k = 0..M-2.
  std::vector<std::vector<long>> counts;
  // Time-averaged posterior after burn-in; alpha_star(0) is E_mu[pi_1].
  Eigen::VectorXd alpha_star;
  Eigen::VectorXd alpha_star_ci;  // half widths across chains (0 for one chain)
  Eigen::VectorXd action_freq;
  double average_regret = 0.0;

  long total_samples() const;
  // Fraction of post burn-in samples with pi_k in [lo, hi], on the bin grid.
  double mass_between(int k, double lo, double hi) const;
};

struct McSummary {
  int reps = 0;
  int horizon = 0;
  std::uint64_t master_seed = 0;
  std::uint64_t problem_hash = 0;
  // Row t is the mean posterior after t + 1 observations.
  Eigen::MatrixXd mean_belief_path;
  std::vector<double> mean_regret_path;  // mean cumulative regret
  int window = 0;
  // Action frequencies over the final window, 95% CI half widths.
  Eigen::VectorXd action_freq;
  Eigen::VectorXd action_freq_ci;
  // Pooled action frequencies over the whole run.
  Eigen::VectorXd run_action_freq;
  Eigen::MatrixXd terminal_beliefs;     // reps x M
  Eigen::MatrixXd window_mean_beliefs;  // reps x M
  std::vector<std::vector<ModelIndex>> surviving_faces;
  std::optional<AbsorptionEstimate> absorption;
  std::optional<StationaryEstimate> stationary;
};

struct McOptions {
  double eps_face = kDefaultEpsFace;
  double window_fraction = kDefaultWindowFraction;
  int threads = 0;  // 0 picks hardware concurrency
};

// Replications use stream_id = replication index. Results do not depend on
// the number of threads.
McSummary mc_batch(const BanditProblem& problem, int horizon, int reps, std::uint64_t master_seed,
                   const McOptions& options = {});

AbsorptionEstimate estimate_absorption(const BanditProblem& problem, double s_abs, int horizon_cap, int reps,
                                       std::uint64_t master_seed, int threads = 0);

StationaryEstimate estimate_stationary(const BanditProblem& problem, int burn_in, int horizon, int bins,
                                       std::uint64_t master_seed, int chains = 1, int threads = 0);

// Models whose posterior exceeded eps_face at least once over the last
// `window` steps. Returns every model when nothing was eliminated.
std::vector<ModelIndex> detect_surviving_face(const Trajectory& traj, double eps_face, int window);

struct KernelExperiment {
  int m = 0;
  long trials = 0;
  long hits = 0;
  double p_hat = 0.0;
  Interval ci;
  double p_theory = 0.0;
  bool degenerate_ci = false;
};

// Frequency with which the kernel of an (m-1) x m standard normal matrix
// meets the simplex.
KernelExperiment kernel_simplex_experiment(int m, long trials, std::uint64_t master_seed);

struct LeafContribution {
  std::vector<ModelIndex> models;
  std::string verdict;
  double weight = 0.0;
  Eigen::VectorXd action_prob;
};

struct LimitingActions {
  Eigen::VectorXd predicted;
  Eigen::VectorXd empirical;
  Eigen::VectorXd empirical_ci;
  double predicted_regret = 0.0;
  double empirical_regret = 0.0;
  std::vector<LeafContribution> components;
};

// Throws MismatchedProblem when the summary, tree and problem disagree.
LimitingActions limiting_action_frequencies(const BanditProblem& problem, const McSummary& summary,
                                            const RegimeTree& tree);

}  // namespace tslab
