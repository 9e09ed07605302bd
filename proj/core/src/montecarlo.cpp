#include "tslab/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>

#include <Eigen/LU>

#include "tslab/errors.hpp"

namespace tslab {
namespace {

constexpr int kBlockSize = 8;

// Runs fn(i) for i in [0, count) on a small pool. Callers write results by
// index so the outcome is independent of scheduling.
template <class Fn>
void parallel_for(int count, int threads, Fn&& fn) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

struct BlockAccum {
  Eigen::MatrixXd belief_sum;
  std::vector<double> regret_sum;
  Eigen::VectorXd run_action_count;
};

}  // namespace

Interval binomial_ci95(double p_hat, long n) {
  if (n <= 0) return {0.0, 1.0};
  const double half = kZ95 * std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(n));
  return {p_hat - half, p_hat + half};
}

McSummary mc_batch(const BanditProblem& problem, int horizon, int reps, std::uint64_t master_seed,
                   const McOptions& options) {
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  if (reps < 1) throw std::invalid_argument("reps must be at least 1");
  const int m = problem.num_models();
  const int num_actions = problem.num_actions();
  const int window = std::max(1, static_cast<int>(std::ceil(options.window_fraction * horizon)));
  const int window_start = horizon - window;

  McSummary out;
  out.reps = reps;
  out.horizon = horizon;
  out.master_seed = master_seed;
  out.problem_hash = problem.hash();
  out.window = window;
  out.terminal_beliefs.resize(reps, m);
  out.window_mean_beliefs.resize(reps, m);
  out.surviving_faces.resize(reps);
  Eigen::MatrixXd window_action_freq(reps, num_actions);

  const int blocks = (reps + kBlockSize - 1) / kBlockSize;
  std::vector<BlockAccum> accum(blocks);
  parallel_for(blocks, options.threads, [&](int block) {
    BlockAccum& acc = accum[block];
    acc.belief_sum = Eigen::MatrixXd::Zero(horizon, m);
    acc.regret_sum.assign(horizon, 0.0);
    acc.run_action_count = Eigen::VectorXd::Zero(num_actions);
    Eigen::VectorXd pi(m);
    for (int rep = block * kBlockSize; rep < std::min(reps, (block + 1) * kBlockSize); ++rep) {
      ThompsonSampler sampler(problem, RngStream(master_seed, static_cast<std::uint64_t>(rep)));
      Eigen::VectorXd window_max = Eigen::VectorXd::Zero(m);
      Eigen::VectorXd window_sum = Eigen::VectorXd::Zero(m);
      Eigen::VectorXd window_actions = Eigen::VectorXd::Zero(num_actions);
      double cum = 0.0;
      for (int t = 0; t < horizon; ++t) {
        const auto step = sampler.step();
        cum += step.instant_regret;
        acc.regret_sum[t] += cum;
        acc.run_action_count(step.action) += 1.0;
        sampler.belief_into(pi);
        acc.belief_sum.row(t) += pi.transpose();
        if (t >= window_start) {
          window_actions(step.action) += 1.0;
          window_sum += pi;
          window_max = window_max.cwiseMax(pi);
        }
      }
      out.terminal_beliefs.row(rep) = pi.transpose();
      out.window_mean_beliefs.row(rep) = (window_sum / window).transpose();
      window_action_freq.row(rep) = (window_actions / window).transpose();
      std::vector<ModelIndex> face;
      for (int k = 0; k < m; ++k) {
        if (window_max(k) > options.eps_face) face.push_back(k);
      }
      if (face.empty()) {
        for (int k = 0; k < m; ++k) face.push_back(k);
      }
      out.surviving_faces[rep] = std::move(face);
    }
  });

  out.mean_belief_path = Eigen::MatrixXd::Zero(horizon, m);
  out.mean_regret_path.assign(horizon, 0.0);
  Eigen::VectorXd run_count = Eigen::VectorXd::Zero(num_actions);
  for (const auto& acc : accum) {
    out.mean_belief_path += acc.belief_sum;
    for (int t = 0; t < horizon; ++t) out.mean_regret_path[t] += acc.regret_sum[t];
    run_count += acc.run_action_count;
  }
  out.mean_belief_path /= reps;
  for (double& v : out.mean_regret_path) v /= reps;
  out.run_action_freq = run_count / (static_cast<double>(reps) * horizon);

  out.action_freq = window_action_freq.colwise().mean().transpose();
  out.action_freq_ci.resize(num_actions);
  for (int a = 0; a < num_actions; ++a) {
    if (reps >= 2) {
      const double mean = out.action_freq(a);
      const double var = (window_action_freq.col(a).array() - mean).square().sum() / (reps - 1);
      out.action_freq_ci(a) = kZ95 * std::sqrt(var / reps);
    } else {
      const Interval ci = binomial_ci95(out.action_freq(a), window);
      out.action_freq_ci(a) = ci.hi - out.action_freq(a);
    }
  }
  return out;
}

AbsorptionEstimate estimate_absorption(const BanditProblem& problem, double s_abs, int horizon_cap, int reps,
                                       std::uint64_t master_seed, int threads) {
  if (problem.num_models() != 2) throw NotTwoModel("absorption estimates need a two-model problem");
  if (!(s_abs > 0.0)) throw std::invalid_argument("s_abs must be positive");
  if (horizon_cap < 1 || reps < 1) throw std::invalid_argument("horizon_cap and reps must be positive");

  struct Outcome {
    int sign = 0;  // +1 / -1 absorbed, 0 censored
    int time = 0;
    double vertex_distance = 0.0;
  };
  std::vector<Outcome> outcomes(reps);
  parallel_for(reps, threads, [&](int rep) {
    ThompsonSampler sampler(problem, RngStream(master_seed, static_cast<std::uint64_t>(rep)));
    Outcome& o = outcomes[rep];
    for (int t = 0; t < horizon_cap; ++t) {
      sampler.step();
      const double s = sampler.log_odds()(0);
      if (std::abs(s) >= s_abs) {
        o.sign = s > 0.0 ? 1 : -1;
        o.time = t + 1;
        // Distance to the nearest vertex is the smaller posterior mass.
        o.vertex_distance = 1.0 / (1.0 + std::exp(std::abs(s)));
        return;
      }
    }
  });

  AbsorptionEstimate est;
  est.s_abs = s_abs;
  est.horizon_cap = horizon_cap;
  est.reps = reps;
  est.initial_log_odds = std::log(problem.prior()[0] / problem.prior()[1]);
  double time_sum = 0.0;
  for (const auto& o : outcomes) {
    if (o.sign == 0) {
      ++est.censored_count;
      continue;
    }
    ++est.absorbed_count;
    if (o.sign > 0) ++est.absorbed_plus;
    time_sum += o.time;
    est.max_vertex_distance = std::max(est.max_vertex_distance, o.vertex_distance);
  }
  est.censored_fraction = static_cast<double>(est.censored_count) / reps;
  if (est.absorbed_count > 0) {
    est.p_hat = static_cast<double>(est.absorbed_plus) / est.absorbed_count;
    est.mean_absorption_time = time_sum / est.absorbed_count;
  }
  est.ci = binomial_ci95(est.p_hat, est.absorbed_count);
  return est;
}

long StationaryEstimate::total_samples() const {
  long total = 0;
  if (!counts.empty()) {
    for (long c : counts.front()) total += c;
  }
  return total;
}

double StationaryEstimate::mass_between(int k, double lo, double hi) const {
  const long total = total_samples();
  if (total == 0) return 0.0;
  long inside = 0;
  const auto& row = counts.at(k);
  for (std::size_t b = 0; b < row.size(); ++b) {
    const double mid = 0.5 * (bin_edges[b] + bin_edges[b + 1]);
    if (mid >= lo && mid <= hi) inside += row[b];
  }
  return static_cast<double>(inside) / total;
}

StationaryEstimate estimate_stationary(const BanditProblem& problem, int burn_in, int horizon, int bins,
                                       std::uint64_t master_seed, int chains, int threads) {
  if (horizon < 1 || burn_in < 0 || burn_in >= horizon) throw std::invalid_argument("need 0 <= burn_in < horizon");
  if (bins < 1 || chains < 1) throw std::invalid_argument("bins and chains must be positive");
  const int m = problem.num_models();
  const int num_actions = problem.num_actions();

  struct ChainResult {
    std::vector<std::vector<long>> counts;
    Eigen::VectorXd belief_sum;
    Eigen::VectorXd action_count;
    double regret_sum = 0.0;
  };
  std::vector<ChainResult> results(chains);
  parallel_for(chains, threads, [&](int chain) {
    ChainResult& res = results[chain];
    res.counts.assign(m - 1, std::vector<long>(bins, 0));
    res.belief_sum = Eigen::VectorXd::Zero(m);
    res.action_count = Eigen::VectorXd::Zero(num_actions);
    ThompsonSampler sampler(problem, RngStream(master_seed, static_cast<std::uint64_t>(chain)));
    Eigen::VectorXd pi(m);
    for (int t = 0; t < horizon; ++t) {
      const auto step = sampler.step();
      if (t < burn_in) continue;
      sampler.belief_into(pi);
      res.belief_sum += pi;
      res.action_count(step.action) += 1.0;
      res.regret_sum += step.instant_regret;
      for (int k = 0; k < m - 1; ++k) {
        const int b = std::min(bins - 1, static_cast<int>(pi(k) * bins));
        ++res.counts[k][b];
      }
    }
  });

  StationaryEstimate est;
  est.burn_in = burn_in;
  est.horizon = horizon;
  est.chains = chains;
  for (int b = 0; b <= bins; ++b) est.bin_edges.push_back(static_cast<double>(b) / bins);
  est.counts.assign(m - 1, std::vector<long>(bins, 0));
  Eigen::VectorXd belief_sum = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd action_count = Eigen::VectorXd::Zero(num_actions);
  double regret_sum = 0.0;
  const double per_chain = horizon - burn_in;
  Eigen::MatrixXd chain_alpha(chains, m);
  for (int c = 0; c < chains; ++c) {
    const auto& res = results[c];
    for (int k = 0; k < m - 1; ++k) {
      for (int b = 0; b < bins; ++b) est.counts[k][b] += res.counts[k][b];
    }
    belief_sum += res.belief_sum;
    action_count += res.action_count;
    regret_sum += res.regret_sum;
    chain_alpha.row(c) = (res.belief_sum / per_chain).transpose();
  }
  const double total = per_chain * chains;
  est.alpha_star = belief_sum / total;
  est.action_freq = action_count / total;
  est.average_regret = regret_sum / total;
  est.alpha_star_ci = Eigen::VectorXd::Zero(m);
  if (chains >= 2) {
    for (int k = 0; k < m; ++k) {
      const double var = (chain_alpha.col(k).array() - est.alpha_star(k)).square().sum() / (chains - 1);
      est.alpha_star_ci(k) = kZ95 * std::sqrt(var / chains);
    }
  }
  return est;
}

std::vector<ModelIndex> detect_surviving_face(const Trajectory& traj, double eps_face, int window) {
  const int horizon = traj.horizon();
  const int m = traj.final_belief.size();
  const int start = horizon - window;
  Eigen::VectorXd window_max = traj.final_belief.probs();
  for (std::size_t i = 0; i < traj.beliefs.size(); ++i) {
    if (traj.belief_steps[i] >= start) window_max = window_max.cwiseMax(traj.beliefs[i].probs());
  }
  std::vector<ModelIndex> face;
  for (int k = 0; k < m; ++k) {
    if (window_max(k) > eps_face) face.push_back(k);
  }
  if (face.empty()) {
    for (int k = 0; k < m; ++k) face.push_back(k);
  }
  return face;
}

KernelExperiment kernel_simplex_experiment(int m, long trials, std::uint64_t master_seed) {
  if (m < 2) throw std::invalid_argument("m must be at least 2");
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");
  KernelExperiment out;
  out.m = m;
  out.trials = trials;
  out.p_theory = std::ldexp(1.0, 1 - m);
  RngStream rng(master_seed, static_cast<std::uint64_t>(m));
  Eigen::MatrixXd A(m - 1, m);
  for (long trial = 0; trial < trials; ++trial) {
    for (int i = 0; i < m - 1; ++i) {
      for (int j = 0; j < m; ++j) A(i, j) = rng.normal();
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    const Eigen::MatrixXd kernel = lu.kernel();
    if (kernel.cols() != 1) continue;
    const auto v = kernel.col(0).array();
    if ((v > 0.0).all() || (v < 0.0).all()) ++out.hits;
  }
  out.p_hat = static_cast<double>(out.hits) / trials;
  out.ci = binomial_ci95(out.p_hat, trials);
  out.degenerate_ci = trials < 2 || out.hits == 0 || out.hits == trials;
  return out;
}

LimitingActions limiting_action_frequencies(const BanditProblem& problem, const McSummary& summary,
                                            const RegimeTree& tree) {
  if (summary.problem_hash != tree.problem_hash || summary.problem_hash != problem.hash()) {
    throw MismatchedProblem("Monte Carlo summary and regime tree describe different problems");
  }
  const int num_actions = problem.num_actions();
  const int m = problem.num_models();
  std::vector<ActionIndex> prescribed(m);
  for (int j = 0; j < m; ++j) prescribed[j] = optimal_action(problem.models(), j);

  auto action_prob = [&](const Eigen::VectorXd& belief) {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(num_actions);
    for (int j = 0; j < m; ++j) p(prescribed[j]) += belief(j);
    return p;
  };

  LimitingActions out;
  out.predicted = Eigen::VectorXd::Zero(num_actions);
  std::vector<const RegimeNode*> tree_leaves = leaves(tree);
  std::vector<LeafContribution> comps;
  std::vector<int> comp_hits;
  auto find_or_add = [&](const std::vector<ModelIndex>& models, const std::string& verdict) -> int {
    for (std::size_t i = 0; i < comps.size(); ++i) {
      if (comps[i].models == models) return static_cast<int>(i);
    }
    comps.push_back(LeafContribution{models, verdict, 0.0, Eigen::VectorXd::Zero(num_actions)});
    comp_hits.push_back(0);
    return static_cast<int>(comps.size()) - 1;
  };

  for (int rep = 0; rep < summary.reps; ++rep) {
    const auto& face = summary.surviving_faces[rep];
    std::string verdict = "Unmatched";
    for (const RegimeNode* leaf : tree_leaves) {
      std::vector<ModelIndex> sorted = leaf->models;
      std::sort(sorted.begin(), sorted.end());
      if (sorted == face) {
        verdict = to_string(leaf->verdict);
        break;
      }
    }
    const int idx = find_or_add(face, verdict);
    ++comp_hits[idx];
    if (face.size() == 1) {
      // Vertex component: the limiting action is the vertex model's choice.
      comps[idx].action_prob = Eigen::VectorXd::Zero(num_actions);
      comps[idx].action_prob(prescribed[face.front()]) = 1.0;
    } else {
      comps[idx].action_prob += action_prob(summary.window_mean_beliefs.row(rep).transpose());
    }
  }
  for (std::size_t i = 0; i < comps.size(); ++i) {
    comps[i].weight = static_cast<double>(comp_hits[i]) / summary.reps;
    if (comps[i].models.size() > 1) comps[i].action_prob /= comp_hits[i];
    out.predicted += comps[i].weight * comps[i].action_prob;
  }
  out.components = std::move(comps);
  out.empirical = summary.action_freq;
  out.empirical_ci = summary.action_freq_ci;
  for (int a = 0; a < num_actions; ++a) {
    const double r = per_period_regret(problem.env(), a);
    out.predicted_regret += out.predicted(a) * r;
    out.empirical_regret += out.empirical(a) * r;
  }
  return out;
}

}  // namespace tslab
