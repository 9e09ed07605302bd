#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tslab/bandit.hpp"
#include "tslab/belief.hpp"
#include "tslab/rng.hpp"

namespace tslab {

inline constexpr double kTolRank = 1e-9;
inline constexpr double kTolFixedPoint = 1e-8;
inline constexpr double kEpsInterior = 1e-9;
inline constexpr double kTolEig = 1e-10;
inline constexpr double kMinFixedPointMass = 1e-12;
// sup_S ||Hessian of the softmax potential|| <= 1/2.
inline constexpr double kPotentialHessianBound = 0.5;

enum class KernelStatus {
  Unique,            // one-dimensional kernel with a same-sign vector
  NonUnique,         // kernel dimension > 1, interior point found by LP
  Absent,            // no interior balance point
  DegenerateKernel,  // rank ambiguous or balance point numerically on the boundary
};

struct FixedPoint {
  std::optional<Belief> belief;
  std::optional<LogOdds> log_odds;
  KernelStatus status = KernelStatus::Absent;
  int kernel_dimension = 0;
};

// Drift objects of the log-odds chain.
//
// d_vectors[j] is the expected log-likelihood-ratio increment when model j's
// prescribed action is played, D stacks them as columns and G has columns
// d_vectors[j] - d_vectors[M-1] for j < M-1.
struct DriftGeometry {
  std::vector<Eigen::VectorXd> d_vectors;
  Eigen::MatrixXd D;
  Eigen::MatrixXd G;
  std::optional<Belief> fixed_point;
  std::optional<LogOdds> s_star;
  KernelStatus kernel_status = KernelStatus::Absent;
  int kernel_dimension = 0;

  int num_models() const noexcept { return static_cast<int>(d_vectors.size()); }
  int dimension() const noexcept { return num_models() - 1; }
};

DriftGeometry geometry_from_drifts(std::vector<Eigen::VectorXd> d_vectors);
DriftGeometry build_geometry(const BanditProblem& problem);

// Expected increment of log(f_nu / f_gamma) under each action; model 1 is nu
// and model 2 (the reference) is gamma. Throws NotTwoModel unless M == 2 and
// WrongShape unless A == 2.
std::array<double, 2> delta_two_arm(const BanditProblem& problem);

// E[log f_k(r|a) - log f_l(r|a)] for r ~ N(g(a), sigma_true^2).
double expected_log_ratio(const BanditProblem& problem, ActionIndex a, ModelIndex k, ModelIndex l);

Eigen::VectorXd vertex_drift(const BanditProblem& problem, ModelIndex j);

Eigen::VectorXd mean_drift(const DriftGeometry& geom, const LogOdds& s);

FixedPoint interior_fixed_point(const Eigen::MatrixXd& D);
inline FixedPoint interior_fixed_point(const DriftGeometry& geom) { return interior_fixed_point(geom.D); }

// Solves G x = -d(a_M) for the non-reference coordinates of the balance point.
// Returns nothing when G is singular.
std::optional<Eigen::VectorXd> fixed_point_by_linear_solve(const DriftGeometry& geom);

enum class HullStatus { InteriorPoint, BoundaryPoint, Outside };

struct SeparatingDirection {
  Eigen::VectorXd w;
  double margin = 0.0;  // min_j w . d(a_j)
};

struct HullReport {
  HullStatus status = HullStatus::Outside;
  // Convex weights reproducing the origin, when it is in the hull.
  std::optional<Eigen::VectorXd> weights;
  double interior_margin = 0.0;  // largest achievable min_j lambda_j
  std::optional<SeparatingDirection> separating;
};

HullReport origin_in_hull(const DriftGeometry& geom);

enum class SpectralVerdict { NegDef, PosDef, Indefinite, Singular };

struct SpectralReport {
  Eigen::VectorXd eigenvalues;  // ascending
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double smallest_magnitude = 0.0;
  SpectralVerdict verdict = SpectralVerdict::Singular;
};

SpectralReport spectral_test(const DriftGeometry& geom);
SpectralReport spectral_test(const Eigen::MatrixXd& G);

struct AngleReport {
  std::vector<double> radii;
  std::vector<double> max_per_radius;
  int samples_per_radius = 0;
  double max_value = 0.0;
  bool holds = false;
  std::optional<LogOdds> witness;
};

inline const std::vector<double> kDefaultAngleRadii{1.0, 2.0, 5.0, 10.0, 20.0};
inline constexpr int kDefaultAngleSamples = 512;

// Numerical audit of <xi(S), S - S*> < 0 on spheres around S*. A passing
// audit covers the sampled points only. Throws NoFixedPoint.
AngleReport angle_test(const DriftGeometry& geom, const std::vector<double>& radii, int samples_per_radius,
                       RngStream& rng);

struct Potential {
  double value = 0.0;
  Eigen::VectorXd gradient;
};

Potential softmax_potential(const LogOdds& s, const Belief& pi_star);

// Uniform bound on E||S_{t+1} - S_t||^2 over all beliefs for Gaussian models.
double noise_bound(const BanditProblem& problem);

struct NoiseReport {
  double sigma_bar_sq = 0.0;
  double c_inf = 0.0;
  double L = kPotentialHessianBound;
  double lambda = 0.0;  // eigenvalue of Sym(G) used in the threshold
  double threshold = 0.0;
  bool small_noise_ok = false;
};

// Throws NoFixedPoint.
NoiseReport small_noise_check(const DriftGeometry& geom, double sigma_bar_sq, const SpectralReport& spectral);

enum class Heuristic { Pass, Unknown };

// Irreducibility heuristic: the increment lines of the prescribed actions
// must span R^{M-1}.
Heuristic irreducibility_heuristic(const BanditProblem& problem);

struct ConditionReport {
  HullReport hull;
  std::optional<SpectralReport> spectral;
  std::optional<AngleReport> angle;
  std::optional<NoiseReport> noise;
  Heuristic irreducibility = Heuristic::Unknown;
};

std::string to_string(KernelStatus s);
std::string to_string(HullStatus s);
std::string to_string(SpectralVerdict v);
std::string to_string(Heuristic h);

}  // namespace tslab
