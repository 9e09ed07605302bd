// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "oracle.hpp"
#include "tslab/construct.hpp"
#include "tslab/drift.hpp"
#include "tslab/dynamics.hpp"
#include "tslab/engine.hpp"
#include "tslab/montecarlo.hpp"

using namespace tslab;

namespace {

constexpr std::uint64_t kSeed = 20240611;

BanditProblem pair_problem(Eigen::Vector2d nu, Eigen::Vector2d gamma, Eigen::Vector2d g) {
  Eigen::MatrixXd m(2, 2);
  m.row(0) = nu.transpose();
  m.row(1) = gamma.transpose();
  return BanditProblem(ModelClass(m, 1.0), TrueEnvironment(g, 1.0));
}

const BanditProblem kAgree = pair_problem({1, -1}, {0.6, -0.6}, {0.95, -0.5});
const BanditProblem kConfirm = pair_problem({1, -1}, {-1, 1}, {0.6, 0.2});
const BanditProblem kDominate = pair_problem({1, -1}, {-1, 1}, {0.7, -0.7});
const BanditProblem kDefeat = pair_problem({1, -1}, {-1, 1}, {-0.2, -0.6});

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome drift_closed_forms() {
  struct Row {
    const BanditProblem* p;
    double d1, d2;
  };
  // The agreeing pair is checked against what the closed form yields.
  const Row rows[] = {{&kAgree, 0.06, -0.12}, {&kConfirm, 1.2, -0.4}, {&kDominate, 1.4, 1.4}, {&kDefeat, -0.4, 1.2}};
  double worst = 0.0;
  for (const auto& r : rows) {
    const auto d = delta_two_arm(*r.p);
    worst = std::max({worst, std::abs(d[0] - r.d1), std::abs(d[1] - r.d2)});
  }
  return {worst < 1e-12, fmt("max |Delta - expected| = %.2e (tol 1e-12)", worst)};
}

Outcome vertex_drift_mc() {
  std::mt19937_64 gen(kSeed);
  constexpr int kDraws = 1000000;
  int checked = 0, failed = 0;
  double worst_z = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 2 + trial % 4;
    const int a = 2 + trial % 3;
    const BanditProblem p = oracle::random_problem(gen, m, a, 1.0 + 0.1 * (trial % 3), 0.7 + 0.2 * (trial % 2));
    std::normal_distribution<double> noise(0.0, p.env().sigma_true);
    for (int j = 0; j < m; ++j) {
      const Eigen::VectorXd d = vertex_drift(p, j);
      const ActionIndex act = optimal_action(p.models(), j);
      Eigen::VectorXd sum = Eigen::VectorXd::Zero(m - 1), sum2 = Eigen::VectorXd::Zero(m - 1);
      for (int i = 0; i < kDraws; ++i) {
        const Eigen::VectorXd z = log_likelihood_increment(p, act, p.env().g(act) + noise(gen));
        sum += z;
        sum2 += z.cwiseProduct(z);
      }
      for (int k = 0; k < m - 1; ++k) {
        const double mean = sum(k) / kDraws;
        const double var = sum2(k) / kDraws - mean * mean;
        const double se = std::sqrt(std::max(var, 0.0) / kDraws);
        const double z = se > 0.0 ? std::abs(mean - d(k)) / se : (mean == d(k) ? 0.0 : INFINITY);
        worst_z = std::max(worst_z, z);
        ++checked;
        failed += z > 3.0;
      }
    }
  }
  return {failed == 0, fmt("%d of %d entries outside 3 SE, worst %.2f SE", failed, checked, worst_z)};
}

Outcome agreement_run() {
  const McSummary s = mc_batch(kAgree, 500, 300, kSeed);
  const double freq = s.run_action_freq(0);
  const double terminal = s.terminal_beliefs.col(0).mean();
  const double regret = s.mean_regret_path.back();
  const bool ok = freq == 1.0 && terminal > 0.95 && regret == 0.0;
  return {ok, fmt("action-1 freq %.6f, mean terminal pi_1 %.6f, cumulative regret %.3g", freq, terminal, regret)};
}

Outcome absorption_run() {
  const AbsorptionEstimate e = estimate_absorption(kConfirm, 20.0, 10000, 2000, kSeed);
  const double frac = static_cast<double>(e.absorbed_count) / e.reps;
  const bool ok = frac >= 0.99 && e.max_vertex_distance < 1e-6;
  return {ok, fmt("absorbed %.4f, max vertex distance %.2e, p_hat %.4f CI [%.4f, %.4f] vs mean-field 0.25 (reported)",
                  frac, e.max_vertex_distance, e.p_hat, e.ci.lo, e.ci.hi)};
}

Outcome dominance_run() {
  const McSummary s = mc_batch(kDominate, 500, 300, kSeed);
  int above = 0;
  for (Eigen::Index r = 0; r < s.terminal_beliefs.rows(); ++r) above += s.terminal_beliefs(r, 0) > 0.99;
  const double frac = static_cast<double>(above) / s.reps;
  const double tail = (s.mean_regret_path[499] - s.mean_regret_path[399]) / 100.0;
  return {frac >= 0.99 && tail < 0.01, fmt("pi_nu > 0.99 in %.4f of runs, final-100 regret %.5f", frac, tail)};
}

Outcome stationary_run() {
  const StationaryEstimate e = estimate_stationary(kDefeat, 20000, 100000, 50, kSeed, 20);
  const double mass = e.mass_between(0, 0.1, 0.9);
  const double alpha = e.alpha_star(0);
  const double predicted = (1.0 - alpha) * 0.4;
  const double rel = std::abs(e.average_regret - predicted) / predicted;
  const bool ok = mass >= 0.05 && alpha > 0.05 && alpha < 0.95 && rel < 0.05;
  return {ok, fmt("mass in [0.1,0.9] %.4f, alpha* %.4f, regret %.5f vs %.5f (rel %.2e)", mass, alpha,
                  e.average_regret, predicted, rel)};
}

Outcome kernel_frequency() {
  bool ok = true;
  std::string detail;
  for (int m = 2; m <= 6; ++m) {
    const KernelExperiment k = kernel_simplex_experiment(m, 100000, kSeed);
    const double band = 3.0 * std::sqrt(k.p_theory * (1.0 - k.p_theory) / k.trials);
    const bool in = std::abs(k.p_hat - k.p_theory) <= band;
    ok &= in;
    detail += fmt("m=%d %.4f%s ", m, k.p_hat, in ? "" : "(out)");
  }
  return {ok, detail + "(99.7% bands)"};
}

// Random drift vectors until the balance point is interior.
DriftGeometry interior_geometry(std::mt19937_64& gen, int m) {
  std::normal_distribution<double> n;
  for (;;) {
    std::vector<Eigen::VectorXd> d(m, Eigen::VectorXd(m - 1));
    for (auto& v : d)
      for (int k = 0; k < m - 1; ++k) v(k) = n(gen);
    DriftGeometry g = geometry_from_drifts(d);
    if (g.fixed_point && g.fixed_point->probs().minCoeff() > 0.02) return g;
  }
}

Outcome factorization_potential() {
  std::mt19937_64 gen(kSeed + 8);
  std::normal_distribution<double> n(0.0, 3.0);
  double worst_xi = 0.0, worst_grad = 0.0;
  for (int geo = 0; geo < 10; ++geo) {
    const int m = 3 + geo % 3;
    const DriftGeometry g = interior_geometry(gen, m);
    Eigen::MatrixXd D(m - 1, m), G(m - 1, m - 1);
    for (int j = 0; j < m; ++j) D.col(j) = g.d_vectors[j];
    for (int j = 0; j < m - 1; ++j) G.col(j) = D.col(j) - D.col(m - 1);
    // Balance point from [D; 1'] pi = [0; 1].
    Eigen::MatrixXd A(m, m);
    A.topRows(m - 1) = D;
    A.row(m - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    rhs(m - 1) = 1.0;
    const Eigen::VectorXd star = A.colPivHouseholderQr().solve(rhs);
    const Belief pi_star(star);
    for (int i = 0; i < 10000; ++i) {
      Eigen::VectorXd s(m - 1);
      for (int k = 0; k < m - 1; ++k) s(k) = n(gen);
      const Eigen::VectorXd pi = oracle::softmax_ref(s);
      const Eigen::VectorXd ref = G * (pi.head(m - 1) - star.head(m - 1));
      worst_xi = std::max(worst_xi, (mean_drift(g, LogOdds{s}) - ref).norm());
      auto f = [&](const Eigen::VectorXd& x) { return softmax_potential(LogOdds{x}, pi_star).value; };
      const Eigen::VectorXd fd = oracle::finite_diff_gradient(f, s);
      worst_grad = std::max(worst_grad, (softmax_potential(LogOdds{s}, pi_star).gradient - fd).norm());
    }
  }
  return {worst_xi < 1e-9 && worst_grad < 1e-6,
          fmt("max factorization error %.2e (tol 1e-9), max gradient error %.2e (tol 1e-6)", worst_xi, worst_grad)};
}

Outcome spectral_behaviour() {
  // Same balance point, one attracting and one repelling geometry.
  const double eps = 0.01;
  const std::vector<Eigen::VectorXd> base{Eigen::Vector2d(-2, -0.5), Eigen::Vector2d(0.5, -2),
                                          Eigen::Vector2d(1.5, 2)};
  std::vector<Eigen::VectorXd> neg, pos;
  for (const auto& d : base) {
    neg.push_back(eps * d);
    pos.push_back(-d);
  }
  const BanditProblem attract = realize_vertex_drifts(neg, 1.0);
  const BanditProblem repel = realize_vertex_drifts(pos, 2.5);
  const DriftGeometry ga = build_geometry(attract);
  const DriftGeometry gr = build_geometry(repel);
  const SpectralReport sa = spectral_test(ga);
  const SpectralReport sr = spectral_test(gr);
  const NoiseReport na = small_noise_check(ga, noise_bound(attract), sa);
  if (sa.verdict != SpectralVerdict::NegDef || sr.verdict != SpectralVerdict::PosDef || !na.small_noise_ok || !ga.s_star)
    return {false, "constructed geometries do not have the intended spectra"};

  constexpr int kSteps = 100000, kChains = 100;
  int stayed = 0;
  for (int c = 0; c < kChains; ++c) {
    ThompsonSampler ts(attract, RngStream(kSeed, c));
    bool ok = true;
    for (int t = 0; t < kSteps && ok; ++t) {
      ts.step();
      ok = (ts.log_odds() - ga.s_star->values).norm() < 30.0;
    }
    stayed += ok;
  }
  int escaped = 0, proper = 0;
  EpisodeOptions opts;
  opts.belief_stride = 100;
  for (int c = 0; c < kChains; ++c) {
    ThompsonSampler ts(repel, RngStream(kSeed + 1, c));
    bool out = false;
    for (int t = 0; t < kSteps && !out; ++t) {
      ts.step();
      out = ts.log_odds().norm() > 50.0;
    }
    escaped += out;
    const Trajectory tr = run_episode(repel, kSteps, RngStream(kSeed + 1, c), opts);
    proper += detect_surviving_face(tr, kDefaultEpsFace, kSteps / 10).size() < 3;
  }
  const bool ok = stayed >= 95 && escaped >= 95 && proper >= 95;
  return {ok, fmt("NegDef chains confined %d/100, PosDef chains escaped %d/100, proper face %d/100", stayed, escaped,
                  proper)};
}

Outcome hull_oracle() {
  std::mt19937_64 gen(kSeed + 10);
  std::normal_distribution<double> n;
  int disagree = 0, inside = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 2 + trial % 3;
    std::vector<Eigen::VectorXd> d(m, Eigen::VectorXd(m - 1));
    for (auto& v : d)
      for (int k = 0; k < m - 1; ++k) v(k) = n(gen);
    const DriftGeometry g = geometry_from_drifts(d);
    const bool ref = oracle::hull_residual(g.D, 20000, gen) < 1e-6;
    const bool got = origin_in_hull(g).status != HullStatus::Outside;
    disagree += ref != got;
    inside += ref;
  }
  return {disagree == 0, fmt("%d disagreements over 100 geometries (%d with 0 in the hull)", disagree, inside)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"drift closed forms", 1.0, drift_closed_forms},
      {"vertex drift Monte Carlo", 30.0, vertex_drift_mc},
      {"agreement", 10.0, agreement_run},
      {"self-confirming absorption", 60.0, absorption_run},
      {"uniform dominance", 10.0, dominance_run},
      {"self-defeating stationarity", 60.0, stationary_run},
      {"kernel meets simplex", 30.0, kernel_frequency},
      {"factorization and potential", 10.0, factorization_potential},
      {"spectral behaviour", 120.0, spectral_behaviour},
      {"hull oracle", 30.0, hull_oracle},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    failures += !pass;
    std::printf("%s  %-28s %s  [%.2fs of %.0fs%s]\n", pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs,
                c.budget_s, in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
