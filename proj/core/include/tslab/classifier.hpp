#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tslab/bandit.hpp"
#include "tslab/drift.hpp"

namespace tslab {

inline constexpr double kTolDelta = 1e-9;

enum class TwoArmLabel {
  AgreementPos,
  AgreementZero,
  AgreementNeg,
  SelfConfirming,
  UniformDominanceNu,
  UniformDominanceGamma,
  SelfDefeating,
  KnifeEdge,  // disagreement with some |Delta| within tol_delta of zero
};

// Long-run regret prediction. `value` is present when the formula needs no
// unknown quantity, or once p* / alpha* has been supplied.
struct RegretPrediction {
  std::string formula;
  std::optional<double> value;
};

struct TwoArmRegime {
  TwoArmLabel label = TwoArmLabel::KnifeEdge;
  std::array<double, 2> deltas{};  // as computed, model 1 = nu, model 2 = gamma
  // Deltas after relabelling actions so that nu prescribes action 1.
  std::array<double, 2> oriented_deltas{};
  bool agreement = false;
  bool actions_swapped = false;
  bool knife_edge = false;
  ActionIndex nu_action = 0;
  ActionIndex gamma_action = 0;
  std::optional<double> p_star_mean_field;  // SelfConfirming only
  std::string predicted_limit;
  RegretPrediction predicted_regret;
  std::vector<std::string> notes;
};

TwoArmRegime classify_two_arm(const BanditProblem& problem);

// Average regret implied by a two-arm label. `mixing` is p* for
// SelfConfirming and alpha* for SelfDefeating; other labels ignore it.
RegretPrediction predicted_two_arm_regret(const TwoArmRegime& regime, const TrueEnvironment& env,
                                          std::optional<double> mixing);

// Sub-problem over the model subset `face` (order preserved, prior
// renormalised). The last element of `face` becomes the reference model.
BanditProblem restrict_to_face(const BanditProblem& problem, const std::vector<ModelIndex>& face);

enum class Verdict { InteriorErgodic, VertexSelection, UniformDominance, FaceErgodic, NestedMixed, Inconclusive };

struct RegimeNode {
  std::vector<ModelIndex> models;  // indices into the root problem
  Verdict verdict = Verdict::Inconclusive;
  std::optional<ConditionReport> conditions;
  std::optional<DriftGeometry> geometry;
  double sigma_bar_sq = 0.0;
  std::vector<std::string> notes;
  std::vector<RegimeNode> children;

  bool is_leaf() const noexcept { return children.empty(); }
};

struct RegimeTree {
  RegimeNode root;
  std::uint64_t problem_hash = 0;
  int max_depth = 0;
};

struct ClassifyOptions {
  std::vector<double> angle_radii = kDefaultAngleRadii;
  int angle_samples = kDefaultAngleSamples;
  std::uint64_t angle_seed = 0x5eed;
  // Faces are enumerated exhaustively only up to this many models.
  int max_enumeration_models = 10;
};

RegimeTree classify_multi(const BanditProblem& problem, int max_depth, const ClassifyOptions& options = {});

// Mean-field invasion test for a candidate surviving face: every model
// outside the face must lose log-odds against it at the face balance point.
bool face_is_invasion_stable(const BanditProblem& problem, const std::vector<ModelIndex>& face);

std::vector<const RegimeNode*> leaves(const RegimeTree& tree);

std::string to_string(TwoArmLabel label);
std::string to_string(Verdict verdict);

}  // namespace tslab
