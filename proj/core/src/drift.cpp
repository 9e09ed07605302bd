#include "tslab/drift.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "tslab/dynamics.hpp"
#include "tslab/errors.hpp"
#include "tslab/lp.hpp"

namespace tslab {

double expected_log_ratio(const BanditProblem& problem, ActionIndex a, ModelIndex k, ModelIndex l) {
  const auto& models = problem.models();
  const double mk = models.mean(k, a);
  const double ml = models.mean(l, a);
  const double g = problem.env().g(a);
  return (mk - ml) * (2.0 * g - mk - ml) / (2.0 * models.sigma() * models.sigma());
}

std::array<double, 2> delta_two_arm(const BanditProblem& problem) {
  if (problem.num_models() != 2) throw NotTwoModel("delta_two_arm needs exactly two models");
  if (problem.num_actions() != 2) throw WrongShape("delta_two_arm needs exactly two actions");
  return {expected_log_ratio(problem, 0, 0, 1), expected_log_ratio(problem, 1, 0, 1)};
}

Eigen::VectorXd vertex_drift(const BanditProblem& problem, ModelIndex j) {
  const int m = problem.num_models();
  const ActionIndex a = optimal_action(problem.models(), j);
  Eigen::VectorXd d(m - 1);
  for (int k = 0; k < m - 1; ++k) d(k) = expected_log_ratio(problem, a, k, m - 1);
  return d;
}

DriftGeometry geometry_from_drifts(std::vector<Eigen::VectorXd> d_vectors) {
  const int m = static_cast<int>(d_vectors.size());
  if (m < 2) throw WrongShape("drift geometry needs at least two models");
  for (const auto& d : d_vectors) {
    if (d.size() != m - 1) throw WrongShape("every drift vector must have M-1 entries");
    if (!d.allFinite()) throw WrongShape("drift vectors must be finite");
  }
  DriftGeometry geom;
  geom.D.resize(m - 1, m);
  for (int j = 0; j < m; ++j) geom.D.col(j) = d_vectors[j];
  geom.G.resize(m - 1, m - 1);
  for (int j = 0; j < m - 1; ++j) geom.G.col(j) = d_vectors[j] - d_vectors[m - 1];
  geom.d_vectors = std::move(d_vectors);

  FixedPoint fp = interior_fixed_point(geom.D);
  geom.fixed_point = std::move(fp.belief);
  geom.s_star = std::move(fp.log_odds);
  geom.kernel_status = fp.status;
  geom.kernel_dimension = fp.kernel_dimension;
  return geom;
}

DriftGeometry build_geometry(const BanditProblem& problem) {
  std::vector<Eigen::VectorXd> d;
  for (int j = 0; j < problem.num_models(); ++j) d.push_back(vertex_drift(problem, j));
  return geometry_from_drifts(std::move(d));
}

Eigen::VectorXd mean_drift(const DriftGeometry& geom, const LogOdds& s) { return geom.D * softmax(s).probs(); }

namespace {

// max t  s.t.  D (t 1 + mu) = 0,  M t + sum(mu) = 1,  t, mu >= 0.
struct MaxMinWeight {
  bool feasible = false;
  double t = 0.0;
  Eigen::VectorXd lambda;
};

MaxMinWeight max_min_convex_weight(const Eigen::MatrixXd& D) {
  const int n = static_cast<int>(D.rows());
  const int m = static_cast<int>(D.cols());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + 1, m + 1);
  A.block(0, 0, n, 1) = D.rowwise().sum();
  A.block(0, 1, n, m) = D;
  A(n, 0) = m;
  A.block(n, 1, 1, m).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 1);
  b(n) = 1.0;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(m + 1);
  c(0) = 1.0;
  lp::Result res = lp::maximize(c, A, b);
  MaxMinWeight out;
  if (res.status != lp::Status::Optimal) return out;
  out.feasible = true;
  out.t = res.x(0);
  out.lambda = res.x.tail(m).array() + res.x(0);
  return out;
}

// max c  s.t.  w . d_j >= c,  -1 <= w <= 1,  0 <= c <= 1, with w = u - 1.
std::optional<SeparatingDirection> separating_direction(const Eigen::MatrixXd& D) {
  const int n = static_cast<int>(D.rows());
  const int m = static_cast<int>(D.cols());
  // Variables: u (n), c (1), s (m), r (n), q (1).
  const int nv = n + 1 + m + n + 1;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m + n + 1, nv);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m + n + 1);
  for (int j = 0; j < m; ++j) {
    A.block(j, 0, 1, n) = D.col(j).transpose();
    A(j, n) = -1.0;
    A(j, n + 1 + j) = -1.0;
    b(j) = D.col(j).sum();
  }
  for (int i = 0; i < n; ++i) {
    A(m + i, i) = 1.0;
    A(m + i, n + 1 + m + i) = 1.0;
    b(m + i) = 2.0;
  }
  A(m + n, n) = 1.0;
  A(m + n, nv - 1) = 1.0;
  b(m + n) = 1.0;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(nv);
  c(n) = 1.0;
  lp::Result res = lp::maximize(c, A, b);
  if (res.status != lp::Status::Optimal) return std::nullopt;
  SeparatingDirection sep;
  sep.w = res.x.head(n).array() - 1.0;
  sep.margin = (sep.w.transpose() * D).minCoeff();
  if (!(sep.margin > 0.0)) return std::nullopt;
  return sep;
}

}  // namespace

FixedPoint interior_fixed_point(const Eigen::MatrixXd& D) {
  const int m = static_cast<int>(D.cols());
  FixedPoint out;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(D, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  int rank = 0;
  bool ambiguous = false;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    const double rel = smax > 0.0 ? sv(i) / smax : 0.0;
    if (rel > kTolRank) ++rank;
    if (rel > 1e-3 * kTolRank && rel <= 1e3 * kTolRank) ambiguous = true;
  }
  out.kernel_dimension = m - rank;

  Eigen::VectorXd pi;
  if (out.kernel_dimension == 1) {
    Eigen::VectorXd v = svd.matrixV().col(m - 1);
    if (v.sum() < 0.0) v = -v;
    out.status = KernelStatus::Unique;
    if ((v.array() > 0.0).all()) {
      pi = v / v.sum();
    } else if ((v.array() > -kMinFixedPointMass).all()) {
      // one-signed up to entries that vanish numerically
      out.status = KernelStatus::DegenerateKernel;
      return out;
    }
  } else {
    MaxMinWeight mm = max_min_convex_weight(D);
    if (mm.feasible && mm.t > kEpsInterior) pi = mm.lambda / mm.lambda.sum();
    out.status = KernelStatus::NonUnique;
  }

  if (pi.size() == 0) {
    out.status = ambiguous ? KernelStatus::DegenerateKernel : KernelStatus::Absent;
    return out;
  }
  if (pi.minCoeff() < kMinFixedPointMass) {
    out.status = KernelStatus::DegenerateKernel;
    return out;
  }
  if (ambiguous) out.status = KernelStatus::DegenerateKernel;
  out.belief = Belief(pi);
  out.log_odds = to_log_odds(*out.belief);
  return out;
}

std::optional<Eigen::VectorXd> fixed_point_by_linear_solve(const DriftGeometry& geom) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(geom.G);
  lu.setThreshold(kTolRank);
  if (!lu.isInvertible()) return std::nullopt;
  return lu.solve(-geom.d_vectors.back());
}

HullReport origin_in_hull(const DriftGeometry& geom) {
  HullReport report;
  MaxMinWeight mm = max_min_convex_weight(geom.D);
  if (mm.feasible) {
    report.weights = mm.lambda;
    report.interior_margin = mm.t;
    report.status = mm.t > kEpsInterior ? HullStatus::InteriorPoint : HullStatus::BoundaryPoint;
    return report;
  }
  report.status = HullStatus::Outside;
  report.separating = separating_direction(geom.D);
  return report;
}

SpectralReport spectral_test(const Eigen::MatrixXd& G) {
  const Eigen::MatrixXd sym = 0.5 * (G + G.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
  SpectralReport rep;
  rep.eigenvalues = solver.eigenvalues();
  rep.lambda_min = rep.eigenvalues.minCoeff();
  rep.lambda_max = rep.eigenvalues.maxCoeff();
  rep.smallest_magnitude = rep.eigenvalues(0);
  for (Eigen::Index i = 1; i < rep.eigenvalues.size(); ++i) {
    if (std::abs(rep.eigenvalues(i)) < std::abs(rep.smallest_magnitude)) rep.smallest_magnitude = rep.eigenvalues(i);
  }
  if (rep.lambda_max < -kTolEig) {
    rep.verdict = SpectralVerdict::NegDef;
  } else if (rep.lambda_min > kTolEig) {
    rep.verdict = SpectralVerdict::PosDef;
  } else if (std::abs(rep.smallest_magnitude) <= kTolEig) {
    rep.verdict = SpectralVerdict::Singular;
  } else {
    rep.verdict = SpectralVerdict::Indefinite;
  }
  return rep;
}

SpectralReport spectral_test(const DriftGeometry& geom) { return spectral_test(geom.G); }

AngleReport angle_test(const DriftGeometry& geom, const std::vector<double>& radii, int samples_per_radius,
                       RngStream& rng) {
  if (!geom.s_star) throw NoFixedPoint("angle test needs an interior fixed point");
  const int n = geom.dimension();
  const Eigen::VectorXd& s_star = geom.s_star->values;
  AngleReport rep;
  rep.radii = radii;
  rep.samples_per_radius = samples_per_radius;
  rep.max_value = -std::numeric_limits<double>::infinity();
  for (std::size_t ri = 0; ri < radii.size(); ++ri) {
    RngStream stream(rng.next_u64(), ri);
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < samples_per_radius; ++i) {
      Eigen::VectorXd u(n);
      double norm = 0.0;
      do {
        for (int k = 0; k < n; ++k) u(k) = stream.normal();
        norm = u.norm();
      } while (norm == 0.0);
      u /= norm;
      LogOdds s{s_star + radii[ri] * u};
      const double value = mean_drift(geom, s).dot(u);
      if (value > best) best = value;
      if (value > rep.max_value) {
        rep.max_value = value;
        if (value >= 0.0) rep.witness = s;
      }
    }
    rep.max_per_radius.push_back(best);
  }
  rep.holds = rep.max_value < 0.0;
  if (rep.holds) rep.witness.reset();
  return rep;
}

Potential softmax_potential(const LogOdds& s, const Belief& pi_star) {
  const int n = s.size();
  const double shift = std::max(0.0, s.values.maxCoeff());
  const double lse = shift + std::log(std::exp(-shift) + (s.values.array() - shift).exp().sum());
  Potential p;
  const Eigen::VectorXd star = pi_star.without_reference();
  p.value = lse - s.values.dot(star);
  p.gradient = softmax(s).probs().head(n) - star;
  return p;
}

double noise_bound(const BanditProblem& problem) {
  double worst = 0.0;
  const double var_true = problem.env().sigma_true * problem.env().sigma_true;
  for (int j = 0; j < problem.num_models(); ++j) {
    const ActionIndex a = optimal_action(problem.models(), j);
    IncrementLine line = increment_line(problem, a);
    const Eigen::VectorXd mean = line.intercept + line.slope * problem.env().g(a);
    worst = std::max(worst, mean.squaredNorm() + line.slope.squaredNorm() * var_true);
  }
  return worst;
}

NoiseReport small_noise_check(const DriftGeometry& geom, double sigma_bar_sq, const SpectralReport& spectral) {
  if (!geom.fixed_point) throw NoFixedPoint("small-noise check needs an interior fixed point");
  NoiseReport rep;
  rep.sigma_bar_sq = sigma_bar_sq;
  rep.c_inf = geom.fixed_point->probs().minCoeff();
  rep.L = kPotentialHessianBound;
  rep.lambda = spectral.smallest_magnitude;
  rep.threshold = std::abs(rep.lambda) * rep.c_inf * rep.c_inf / rep.L;
  rep.small_noise_ok = sigma_bar_sq <= rep.threshold;
  return rep;
}

Heuristic irreducibility_heuristic(const BanditProblem& problem) {
  const int n = problem.num_models() - 1;
  std::vector<ActionIndex> actions;
  for (int j = 0; j < problem.num_models(); ++j) {
    const ActionIndex a = optimal_action(problem.models(), j);
    if (std::find(actions.begin(), actions.end(), a) == actions.end()) actions.push_back(a);
  }
  Eigen::MatrixXd slopes(n, actions.size());
  for (std::size_t i = 0; i < actions.size(); ++i) slopes.col(i) = increment_line(problem, actions[i]).slope;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(slopes);
  lu.setThreshold(kTolRank);
  return lu.rank() == n ? Heuristic::Pass : Heuristic::Unknown;
}

std::string to_string(KernelStatus s) {
  switch (s) {
    case KernelStatus::Unique: return "Unique";
    case KernelStatus::NonUnique: return "NonUnique";
    case KernelStatus::Absent: return "Absent";
    case KernelStatus::DegenerateKernel: return "DegenerateKernel";
  }
  return "?";
}

std::string to_string(HullStatus s) {
  switch (s) {
    case HullStatus::InteriorPoint: return "InteriorPoint";
    case HullStatus::BoundaryPoint: return "BoundaryPoint";
    case HullStatus::Outside: return "Outside";
  }
  return "?";
}

std::string to_string(SpectralVerdict v) {
  switch (v) {
    case SpectralVerdict::NegDef: return "NegDef";
    case SpectralVerdict::PosDef: return "PosDef";
    case SpectralVerdict::Indefinite: return "Indefinite";
    case SpectralVerdict::Singular: return "Singular";
  }
  return "?";
}

std::string to_string(Heuristic h) { return h == Heuristic::Pass ? "pass" : "unknown"; }

}  // namespace tslab
