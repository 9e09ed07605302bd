#pragma once

#include <Eigen/Core>

namespace tslab {

inline constexpr double kTolSum = 1e-10;
inline constexpr double kFloorEps = 1e-300;

// Point of the probability simplex over the M candidate models.
class Belief {
 public:
  explicit Belief(Eigen::VectorXd probs);

  static Belief uniform(int num_models);

  const Eigen::VectorXd& probs() const noexcept { return probs_; }
  int size() const noexcept { return static_cast<int>(probs_.size()); }
  double operator[](int i) const { return probs_(i); }

  // True when every model carries strictly positive mass.
  bool interior() const noexcept;

  // First M-1 coordinates, i.e. the belief with the reference model dropped.
  Eigen::VectorXd without_reference() const { return probs_.head(probs_.size() - 1); }

 private:
  Eigen::VectorXd probs_;
};

// Log-odds of models 1..M-1 against the reference model M.
struct LogOdds {
  Eigen::VectorXd values;

  int size() const noexcept { return static_cast<int>(values.size()); }
  int num_models() const noexcept { return size() + 1; }
};

Belief softmax(const LogOdds& s);

// Throws BoundaryBelief when any coordinate is at or below kFloorEps.
LogOdds to_log_odds(const Belief& b);

// M x (M-1) matrix of d pi_i / d S_k.
Eigen::MatrixXd softmax_jacobian(const Belief& b);

// Normalised exp(log_weights) with a max shift. Entries may underflow to 0.
Eigen::VectorXd normalize_log_weights(const Eigen::VectorXd& log_weights);

}  // namespace tslab
