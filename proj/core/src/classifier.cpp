#include "tslab/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tslab/errors.hpp"

namespace tslab {
namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

RegretPrediction predicted_two_arm_regret(const TwoArmRegime& regime, const TrueEnvironment& env,
                                          std::optional<double> mixing) {
  const double r_nu = per_period_regret(env, regime.nu_action);
  const double r_gamma = per_period_regret(env, regime.gamma_action);
  RegretPrediction out;
  switch (regime.label) {
    case TwoArmLabel::AgreementPos:
    case TwoArmLabel::AgreementZero:
    case TwoArmLabel::AgreementNeg:
      out.formula = "r(common action)";
      out.value = r_nu;
      break;
    case TwoArmLabel::UniformDominanceNu:
      out.formula = "r(phi(nu))";
      out.value = r_nu;
      break;
    case TwoArmLabel::UniformDominanceGamma:
      out.formula = "r(phi(gamma))";
      out.value = r_gamma;
      break;
    case TwoArmLabel::SelfConfirming:
      out.formula = "p* r(phi(nu)) + (1 - p*) r(phi(gamma))";
      if (mixing) out.value = *mixing * r_nu + (1.0 - *mixing) * r_gamma;
      break;
    case TwoArmLabel::SelfDefeating:
      out.formula = "alpha* r(phi(nu)) + (1 - alpha*) r(phi(gamma))";
      if (mixing) out.value = *mixing * r_nu + (1.0 - *mixing) * r_gamma;
      break;
    case TwoArmLabel::KnifeEdge:
      out.formula = "undetermined (knife-edge)";
      break;
  }
  return out;
}

TwoArmRegime classify_two_arm(const BanditProblem& problem) {
  if (problem.num_models() != 2 || problem.num_actions() != 2) {
    throw WrongShape("two-arm classification needs two models and two actions");
  }
  TwoArmRegime out;
  out.deltas = delta_two_arm(problem);
  out.nu_action = optimal_action(problem.models(), 0);
  out.gamma_action = optimal_action(problem.models(), 1);
  out.agreement = out.nu_action == out.gamma_action;

  if (out.agreement) {
    const double d = out.deltas[out.nu_action];
    out.oriented_deltas = out.deltas;
    if (std::abs(d) <= kTolDelta) {
      out.label = TwoArmLabel::AgreementZero;
      out.knife_edge = true;
      out.predicted_limit = "Bernoulli(1/2) over models (martingale)";
      out.notes.push_back("knife-edge: Delta on the common action is within tol_delta of zero");
    } else if (d > 0.0) {
      out.label = TwoArmLabel::AgreementPos;
      out.predicted_limit = "point mass on nu";
    } else {
      out.label = TwoArmLabel::AgreementNeg;
      out.predicted_limit = "point mass on gamma";
    }
    out.predicted_regret = predicted_two_arm_regret(out, problem.env(), std::nullopt);
    return out;
  }

  out.actions_swapped = out.nu_action != 0;
  out.oriented_deltas = {out.deltas[out.nu_action], out.deltas[out.gamma_action]};
  if (out.actions_swapped) out.notes.push_back("actions relabelled so that nu prescribes action 1");
  const double d1 = out.oriented_deltas[0];
  const double d2 = out.oriented_deltas[1];

  if (std::abs(d1) <= kTolDelta || std::abs(d2) <= kTolDelta) {
    out.label = TwoArmLabel::KnifeEdge;
    out.knife_edge = true;
    out.predicted_limit = "undetermined";
    out.notes.push_back("knife-edge: Delta1 = " + fmt(d1) + ", Delta2 = " + fmt(d2) + " within tol_delta of zero");
  } else if (d1 > 0.0 && d2 < 0.0) {
    out.label = TwoArmLabel::SelfConfirming;
    out.p_star_mean_field = -d2 / (d1 - d2);
    out.predicted_limit = "Bernoulli(p*) over {nu, gamma}";
  } else if (d1 > 0.0 && d2 > 0.0) {
    out.label = TwoArmLabel::UniformDominanceNu;
    out.predicted_limit = "point mass on nu";
  } else if (d1 < 0.0 && d2 < 0.0) {
    out.label = TwoArmLabel::UniformDominanceGamma;
    out.predicted_limit = "point mass on gamma";
  } else {
    out.label = TwoArmLabel::SelfDefeating;
    out.predicted_limit = "invariant measure on (0,1)";
  }
  out.predicted_regret = predicted_two_arm_regret(out, problem.env(), std::nullopt);
  return out;
}

BanditProblem restrict_to_face(const BanditProblem& problem, const std::vector<ModelIndex>& face) {
  if (face.empty()) throw EmptyFace("face must contain at least one model");
  if (face.size() == 1) throw WrongShape("a single-model face is a vertex; it has no log-odds dynamics");
  for (std::size_t i = 0; i < face.size(); ++i) {
    if (face[i] < 0 || face[i] >= problem.num_models()) throw WrongShape("face index out of range");
    for (std::size_t j = 0; j < i; ++j) {
      if (face[i] == face[j]) throw WrongShape("face indices must be distinct");
    }
  }
  const int k = static_cast<int>(face.size());
  Eigen::MatrixXd means(k, problem.num_actions());
  Eigen::VectorXd prior(k);
  for (int i = 0; i < k; ++i) {
    means.row(i) = problem.models().means().row(face[i]);
    prior(i) = problem.prior()[face[i]];
  }
  prior /= prior.sum();
  return BanditProblem(ModelClass(means, problem.models().sigma()), problem.env(), Belief(prior));
}

bool face_is_invasion_stable(const BanditProblem& problem, const std::vector<ModelIndex>& face) {
  const int m = problem.num_models();
  auto outside = [&](int k) { return std::find(face.begin(), face.end(), k) == face.end(); };
  if (face.size() == 1) {
    const ModelIndex v = face.front();
    const ActionIndex a = optimal_action(problem.models(), v);
    for (int k = 0; k < m; ++k) {
      if (k != v && expected_log_ratio(problem, a, v, k) <= kTolDelta) return false;
    }
    return true;
  }
  const DriftGeometry geom = build_geometry(restrict_to_face(problem, face));
  if (!geom.fixed_point) return false;
  const ModelIndex ref = face.back();
  for (int k = 0; k < m; ++k) {
    if (!outside(k)) continue;
    double rate = 0.0;
    for (std::size_t i = 0; i < face.size(); ++i) {
      const ActionIndex a = optimal_action(problem.models(), face[i]);
      rate += (*geom.fixed_point)[static_cast<int>(i)] * expected_log_ratio(problem, a, k, ref);
    }
    if (rate >= -kTolDelta) return false;
  }
  return true;
}

namespace {

class MultiClassifier {
 public:
  MultiClassifier(const BanditProblem& problem, int max_depth, const ClassifyOptions& options)
      : problem_(problem), max_depth_(max_depth), options_(options) {}

  RegimeNode classify(const std::vector<ModelIndex>& models, int depth, bool outside_chain) {
    RegimeNode node;
    node.models = models;
    if (models.size() == 1) {
      node.verdict = outside_chain ? Verdict::UniformDominance : Verdict::VertexSelection;
      return node;
    }

    const BanditProblem sub = restrict_to_face(problem_, models);
    DriftGeometry geom = build_geometry(sub);
    ConditionReport cond;
    cond.hull = origin_in_hull(geom);
    cond.irreducibility = irreducibility_heuristic(sub);
    node.sigma_bar_sq = noise_bound(sub);

    bool transient = false;
    bool chain = false;
    if (cond.hull.status == HullStatus::Outside) {
      transient = true;
      chain = outside_chain;
      node.notes.push_back("origin outside the drift hull: transient");
    } else if (geom.fixed_point) {
      cond.spectral = spectral_test(geom);
      cond.noise = small_noise_check(geom, node.sigma_bar_sq, *cond.spectral);
      RngStream rng(options_.angle_seed, face_key(models));
      cond.angle = angle_test(geom, options_.angle_radii, options_.angle_samples, rng);
      const bool small_noise = cond.noise->small_noise_ok;
      const auto verdict = cond.spectral->verdict;
      if ((verdict == SpectralVerdict::NegDef && small_noise) || cond.angle->holds) {
        node.verdict = Verdict::InteriorErgodic;
        node.notes.push_back(cond.angle->holds ? "angle audit holds on all sampled spheres"
                                               : "Sym(G) negative definite under the small-noise gate");
      } else if (verdict == SpectralVerdict::PosDef && small_noise) {
        transient = true;
        node.notes.push_back("Sym(G) positive definite under the small-noise gate: transient");
      } else {
        node.verdict = Verdict::Inconclusive;
        node.notes.push_back("no sufficient condition fires: Sym(G) " + to_string(verdict) + " [" +
                             fmt(cond.spectral->lambda_min) + ", " + fmt(cond.spectral->lambda_max) +
                             "], sigma_bar^2 = " + fmt(cond.noise->sigma_bar_sq) + " vs threshold " +
                             fmt(cond.noise->threshold) + ", angle max = " + fmt(cond.angle->max_value));
      }
    } else {
      node.verdict = Verdict::Inconclusive;
      node.notes.push_back("origin in the drift hull but no interior balance point (" +
                           to_string(cond.hull.status) + ", kernel " + to_string(geom.kernel_status) + ")");
    }
    node.conditions = std::move(cond);
    node.geometry = std::move(geom);

    if (transient) expand(node, sub, depth, chain);
    return node;
  }

 private:
  static std::uint64_t face_key(const std::vector<ModelIndex>& models) {
    std::uint64_t key = 0;
    for (ModelIndex m : models) key |= std::uint64_t{1} << (m % 64);
    return key;
  }

  void expand(RegimeNode& node, const BanditProblem& sub, int depth, bool chain) {
    const int k = static_cast<int>(node.models.size());
    if (depth >= max_depth_) {
      node.verdict = Verdict::Inconclusive;
      node.notes.push_back("transient, but the recursion depth cap was reached");
      return;
    }
    if (k > options_.max_enumeration_models) {
      node.verdict = Verdict::Inconclusive;
      node.notes.push_back("transient; face enumeration capped, surviving faces left to Monte Carlo");
      return;
    }
    std::vector<std::vector<ModelIndex>> candidates;
    const std::uint32_t full = (std::uint32_t{1} << k) - 1;
    for (std::uint32_t mask = 1; mask < full; ++mask) {
      std::vector<ModelIndex> local;
      for (int i = 0; i < k; ++i) {
        if (mask & (std::uint32_t{1} << i)) local.push_back(i);
      }
      if (face_is_invasion_stable(sub, local)) candidates.push_back(std::move(local));
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const auto& a, const auto& b) { return a.size() < b.size(); });
    if (candidates.empty()) {
      node.verdict = Verdict::Inconclusive;
      node.notes.push_back("transient, but no invasion-stable face was found");
      return;
    }
    bool all_vertices = true;
    for (const auto& local : candidates) {
      std::vector<ModelIndex> global;
      for (int i : local) global.push_back(node.models[i]);
      all_vertices = all_vertices && global.size() == 1;
      node.children.push_back(classify(global, depth + 1, chain));
    }
    if (all_vertices) {
      node.verdict = (candidates.size() == 1 && chain) ? Verdict::UniformDominance : Verdict::VertexSelection;
    } else if (candidates.size() == 1 && node.children.front().verdict == Verdict::InteriorErgodic) {
      node.verdict = Verdict::FaceErgodic;
    } else {
      node.verdict = Verdict::NestedMixed;
    }
  }

  const BanditProblem& problem_;
  int max_depth_;
  ClassifyOptions options_;
};

void collect_leaves(const RegimeNode& node, std::vector<const RegimeNode*>& out) {
  if (node.is_leaf()) {
    out.push_back(&node);
    return;
  }
  for (const auto& child : node.children) collect_leaves(child, out);
}

}  // namespace

RegimeTree classify_multi(const BanditProblem& problem, int max_depth, const ClassifyOptions& options) {
  RegimeTree tree;
  tree.problem_hash = problem.hash();
  tree.max_depth = max_depth;
  std::vector<ModelIndex> all(problem.num_models());
  for (int i = 0; i < problem.num_models(); ++i) all[i] = i;
  MultiClassifier classifier(problem, max_depth, options);
  tree.root = classifier.classify(all, 0, true);
  return tree;
}

std::vector<const RegimeNode*> leaves(const RegimeTree& tree) {
  std::vector<const RegimeNode*> out;
  collect_leaves(tree.root, out);
  return out;
}

std::string to_string(TwoArmLabel label) {
  switch (label) {
    case TwoArmLabel::AgreementPos: return "AgreementPos";
    case TwoArmLabel::AgreementZero: return "AgreementZero";
    case TwoArmLabel::AgreementNeg: return "AgreementNeg";
    case TwoArmLabel::SelfConfirming: return "SelfConfirming";
    case TwoArmLabel::UniformDominanceNu: return "UniformDominanceNu";
    case TwoArmLabel::UniformDominanceGamma: return "UniformDominanceGamma";
    case TwoArmLabel::SelfDefeating: return "SelfDefeating";
    case TwoArmLabel::KnifeEdge: return "KnifeEdge";
  }
  return "?";
}

std::string to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::InteriorErgodic: return "InteriorErgodic";
    case Verdict::VertexSelection: return "VertexSelection";
    case Verdict::UniformDominance: return "UniformDominance";
    case Verdict::FaceErgodic: return "FaceErgodic";
    case Verdict::NestedMixed: return "NestedMixed";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

}  // namespace tslab
