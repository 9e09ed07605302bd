#include <doctest.h>

#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "tslab/lp.hpp"

using namespace tslab;

namespace {

// Best basic feasible solution by enumerating every column subset of size
// rank(A). Returns nothing when no basic solution is feasible.
std::optional<double> brute_force_max(const Eigen::VectorXd& c, const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  const int n = static_cast<int>(A.cols());
  const int m = static_cast<int>(A.rows());
  std::optional<double> best;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (__builtin_popcount(mask) != m) continue;
    Eigen::MatrixXd B(m, m);
    std::vector<int> cols;
    for (int j = 0; j < n; ++j)
      if (mask & (1u << j)) cols.push_back(j);
    for (int k = 0; k < m; ++k) B.col(k) = A.col(cols[k]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
    if (!lu.isInvertible()) continue;
    const Eigen::VectorXd xb = lu.solve(b);
    if (xb.minCoeff() < -1e-9) continue;
    double val = 0.0;
    for (int k = 0; k < m; ++k) val += c(cols[k]) * xb(k);
    if (!best || val > *best) best = val;
  }
  return best;
}

}  // namespace

TEST_CASE("small textbook problem") {
  // max 3x + 2y s.t. x + y + s1 = 4, x + 3y + s2 = 6
  Eigen::MatrixXd A(2, 4);
  A << 1, 1, 1, 0, 1, 3, 0, 1;
  const lp::Result r = lp::maximize(Eigen::Vector4d(3, 2, 0, 0), A, Eigen::Vector2d(4, 6));
  REQUIRE(r.status == lp::Status::Optimal);
  CHECK(r.objective == doctest::Approx(12.0));
  CHECK(r.x(0) == doctest::Approx(4.0));
}

TEST_CASE("infeasible and unbounded problems") {
  Eigen::MatrixXd A(1, 2);
  A << 1, 1;
  CHECK(lp::maximize(Eigen::Vector2d(1, 0), A, Eigen::VectorXd::Constant(1, -1.0)).status == lp::Status::Infeasible);
  Eigen::MatrixXd U(1, 2);
  U << 1, -1;
  CHECK(lp::maximize(Eigen::Vector2d(1, 0), U, Eigen::VectorXd::Constant(1, 0.0)).status == lp::Status::Unbounded);
}

TEST_CASE("redundant equality rows") {
  Eigen::MatrixXd A(3, 3);
  A << 1, 1, 1, 2, 2, 2, 1, -1, 0;
  const lp::Result r = lp::maximize(Eigen::Vector3d(0, 0, 1), A, Eigen::Vector3d(1, 2, 0));
  REQUIRE(r.status == lp::Status::Optimal);
  CHECK(r.objective == doctest::Approx(1.0));
}

TEST_CASE("random bounded problems agree with vertex enumeration") {
  std::mt19937_64 gen(41);
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> u(0.1, 1.0);
  int feasible = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int m = 1 + trial % 3;
    const int k = m + 2 + trial % 3;
    // Last row is a positive budget row, which keeps the feasible set bounded.
    Eigen::MatrixXd A(m, k);
    for (int i = 0; i < m - 1; ++i)
      for (int j = 0; j < k; ++j) A(i, j) = n(gen);
    for (int j = 0; j < k; ++j) A(m - 1, j) = u(gen);
    Eigen::VectorXd b(m);
    for (int i = 0; i < m - 1; ++i) b(i) = n(gen);
    b(m - 1) = 1.0;
    Eigen::VectorXd c(k);
    for (int j = 0; j < k; ++j) c(j) = n(gen);

    const lp::Result r = lp::maximize(c, A, b);
    const auto ref = brute_force_max(c, A, b);
    CHECK(r.status != lp::Status::Unbounded);
    CHECK((r.status == lp::Status::Optimal) == ref.has_value());
    if (r.status == lp::Status::Optimal && ref) {
      ++feasible;
      CHECK(r.objective == doctest::Approx(*ref).epsilon(1e-8));
      CHECK((A * r.x - b).cwiseAbs().maxCoeff() < 1e-8);
      CHECK(r.x.minCoeff() >= -1e-12);
    }
  }
  CHECK(feasible > 50);
}
