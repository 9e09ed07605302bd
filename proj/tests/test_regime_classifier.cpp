#include <doctest.h>

#include <functional>
#include <random>

#include "oracle.hpp"
#include "tslab/classifier.hpp"
#include "tslab/construct.hpp"
#include "tslab/drift.hpp"
#include "tslab/errors.hpp"

using namespace tslab;

namespace {

BanditProblem pair_problem(Eigen::Vector2d nu, Eigen::Vector2d gamma, Eigen::Vector2d g) {
  Eigen::MatrixXd m(2, 2);
  m.row(0) = nu.transpose();
  m.row(1) = gamma.transpose();
  return BanditProblem(ModelClass(m, 1.0), TrueEnvironment(g, 1.0));
}

BanditProblem swap_models(const BanditProblem& p) {
  Eigen::MatrixXd m = p.models().means().colwise().reverse();
  return BanditProblem(ModelClass(m, p.models().sigma()), p.env());
}

BanditProblem swap_actions(const BanditProblem& p) {
  Eigen::MatrixXd m = p.models().means().rowwise().reverse();
  Eigen::VectorXd g = p.env().g.reverse();
  return BanditProblem(ModelClass(m, p.models().sigma()), TrueEnvironment(g, p.env().sigma_true));
}

TwoArmLabel mirror(TwoArmLabel l) {
  switch (l) {
    case TwoArmLabel::AgreementPos: return TwoArmLabel::AgreementNeg;
    case TwoArmLabel::AgreementNeg: return TwoArmLabel::AgreementPos;
    case TwoArmLabel::UniformDominanceNu: return TwoArmLabel::UniformDominanceGamma;
    case TwoArmLabel::UniformDominanceGamma: return TwoArmLabel::UniformDominanceNu;
    default: return l;
  }
}

Eigen::VectorXd v2(double a, double b) { return Eigen::Vector2d(a, b); }

const BanditProblem kAgree = pair_problem({1, -1}, {0.6, -0.6}, {0.95, -0.5});
const BanditProblem kConfirm = pair_problem({1, -1}, {-1, 1}, {0.6, 0.2});
const BanditProblem kDominate = pair_problem({1, -1}, {-1, 1}, {0.7, -0.7});
const BanditProblem kDefeat = pair_problem({1, -1}, {-1, 1}, {-0.2, -0.6});

void walk(const RegimeNode& n, const std::function<void(const RegimeNode&)>& f) {
  f(n);
  for (const auto& c : n.children) walk(c, f);
}

}  // namespace

TEST_CASE("two-arm labels of the four reference cases") {
  const TwoArmRegime r1 = classify_two_arm(kAgree);
  CHECK(r1.agreement);
  CHECK(r1.label == TwoArmLabel::AgreementPos);
  CHECK(r1.predicted_regret.value == doctest::Approx(0.0));

  const TwoArmRegime r2 = classify_two_arm(kConfirm);
  CHECK_FALSE(r2.agreement);
  CHECK(r2.label == TwoArmLabel::SelfConfirming);
  REQUIRE(r2.p_star_mean_field);
  CHECK(*r2.p_star_mean_field == doctest::Approx(0.4 / 1.6).epsilon(1e-12));
  CHECK_FALSE(r2.predicted_regret.value);

  const TwoArmRegime r3 = classify_two_arm(kDominate);
  CHECK(r3.label == TwoArmLabel::UniformDominanceNu);
  CHECK(r3.predicted_regret.value == doctest::Approx(0.0));

  const TwoArmRegime r4 = classify_two_arm(kDefeat);
  CHECK(r4.label == TwoArmLabel::SelfDefeating);
  CHECK(r4.deltas[0] == doctest::Approx(-0.4));
  CHECK(r4.deltas[1] == doctest::Approx(1.2));
}

TEST_CASE("mirrored dominance and knife edges") {
  CHECK(classify_two_arm(swap_models(kDominate)).label == TwoArmLabel::UniformDominanceGamma);
  // nu and gamma both prescribe action 1 and Delta_1 = 0.4 (2 g_1 - 1.6) / 2 = 0 at g_1 = 0.8.
  const TwoArmRegime zero = classify_two_arm(pair_problem({1, 0}, {0.6, 0}, {0.8, 0.1}));
  CHECK(zero.label == TwoArmLabel::AgreementZero);
  CHECK(zero.knife_edge);
  const TwoArmRegime knife = classify_two_arm(pair_problem({1, -1}, {-1, 1}, {0.0, 0.5}));
  CHECK(knife.label == TwoArmLabel::KnifeEdge);
  CHECK_FALSE(knife.predicted_regret.value);
}

TEST_CASE("two-arm label under relabelling") {
  std::mt19937_64 gen(51);
  int disagreements = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const BanditProblem p = oracle::random_problem(gen, 2, 2);
    const TwoArmRegime r = classify_two_arm(p);
    CHECK(classify_two_arm(swap_models(p)).label == mirror(r.label));
    CHECK(classify_two_arm(swap_actions(p)).label == r.label);
    if (!r.agreement) {
      ++disagreements;
      CHECK(r.oriented_deltas[0] == r.deltas[r.nu_action]);
      CHECK(r.actions_swapped == (r.nu_action == 1));
    }
  }
  CHECK(disagreements > 50);
  Eigen::MatrixXd m3 = Eigen::MatrixXd::Zero(3, 2);
  CHECK_THROWS_AS(classify_two_arm(BanditProblem(ModelClass(m3, 1.0), TrueEnvironment(v2(0, 0), 1.0))), WrongShape);
}

TEST_CASE("predicted regret formulas") {
  const TwoArmRegime r4 = classify_two_arm(kDefeat);
  for (double alpha : {0.1, 0.5, 0.75}) {
    const auto pred = predicted_two_arm_regret(r4, kDefeat.env(), alpha);
    REQUIRE(pred.value);
    CHECK(*pred.value == doctest::Approx((1.0 - alpha) * 0.4).epsilon(1e-12));
  }
  const TwoArmRegime r2 = classify_two_arm(kConfirm);
  const auto pred = predicted_two_arm_regret(r2, kConfirm.env(), 0.78);
  CHECK(*pred.value == doctest::Approx(0.22 * 0.4).epsilon(1e-12));
  // The dominant model plays action 1 either way, which is optimal here.
  const auto dom = predicted_two_arm_regret(classify_two_arm(swap_models(kDominate)), kDominate.env(), std::nullopt);
  CHECK(*dom.value == doctest::Approx(0.0));
  const BanditProblem bad = pair_problem({1, -1}, {-1, 1}, {-0.7, 0.7});
  const TwoArmRegime rb = classify_two_arm(bad);
  REQUIRE(rb.label == TwoArmLabel::UniformDominanceGamma);
  CHECK(*predicted_two_arm_regret(rb, bad.env(), std::nullopt).value == doctest::Approx(0.0));
}

TEST_CASE("restricting to a face") {
  Eigen::MatrixXd m(3, 3);
  m << 1.0, 0.2, -0.4, 0.3, 1.1, 0.0, -0.5, 0.4, 0.9;
  const BanditProblem p(ModelClass(m, 1.0), TrueEnvironment(Eigen::Vector3d(0.5, 0.1, 0.3), 1.0),
                        Belief(Eigen::Vector3d(0.2, 0.3, 0.5)));
  const BanditProblem all = restrict_to_face(p, {0, 1, 2});
  CHECK(all.hash() == p.hash());

  const BanditProblem sub = restrict_to_face(p, {0, 1});
  CHECK(sub.prior()[0] == doctest::Approx(0.4));
  CHECK(sub.models().means().row(1) == m.row(1));
  // Pairwise drift of model 1 against model 2 under each action of the parent.
  Eigen::MatrixXd m2(2, 2);
  m2 << 1.0, 0.2, 0.3, 1.1;
  const BanditProblem two(ModelClass(m2, 1.0), TrueEnvironment(v2(0.5, 0.1), 1.0));
  const auto d = delta_two_arm(two);
  CHECK(d[0] == doctest::Approx(expected_log_ratio(p, 0, 0, 1)).epsilon(1e-14));
  CHECK(d[1] == doctest::Approx(expected_log_ratio(p, 1, 0, 1)).epsilon(1e-14));
  CHECK(build_geometry(sub).d_vectors[0](0) == doctest::Approx(expected_log_ratio(p, 0, 0, 1)).epsilon(1e-14));

  CHECK_THROWS_AS(restrict_to_face(p, {}), EmptyFace);
  CHECK_THROWS_AS(restrict_to_face(p, {1}), WrongShape);
  CHECK_THROWS_AS(restrict_to_face(p, {0, 0}), WrongShape);
  CHECK_THROWS_AS(restrict_to_face(p, {0, 3}), WrongShape);
}

TEST_CASE("multi-model classification of the reference geometries") {
  SUBCASE("self-defeating two-model problem is a single ergodic node") {
    const RegimeTree t = classify_multi(kDefeat, 3);
    CHECK(t.root.verdict == Verdict::InteriorErgodic);
    CHECK(t.root.is_leaf());
    CHECK(t.problem_hash == kDefeat.hash());
  }
  SUBCASE("drift to a vertex") {
    const BanditProblem p = realize_vertex_drifts({v2(1, 1.5), v2(-0.5, 1), v2(0.3, 0.8)}, 2.5);
    const RegimeTree t = classify_multi(p, 3);
    CHECK(t.root.verdict == Verdict::UniformDominance);
    REQUIRE(t.root.conditions);
    CHECK(t.root.conditions->hull.status == HullStatus::Outside);
    REQUIRE(t.root.children.size() == 1);
    CHECK(t.root.children[0].models == std::vector<ModelIndex>{1});
    CHECK(t.root.children[0].verdict == Verdict::UniformDominance);
  }
  SUBCASE("drift to a face interior") {
    const BanditProblem p = realize_vertex_drifts({v2(-0.5, 1.5), v2(1.5, -0.5), v2(1, 1)}, 2.5);
    const RegimeTree t = classify_multi(p, 3);
    CHECK(t.root.verdict == Verdict::FaceErgodic);
    REQUIRE(t.root.children.size() == 1);
    CHECK(t.root.children[0].models == std::vector<ModelIndex>{0, 1});
    CHECK(t.root.children[0].verdict == Verdict::InteriorErgodic);
  }
  SUBCASE("indefinite Sym(G) with an interior balance point") {
    // G = diag(1, -1) with pi* uniform.
    const BanditProblem p =
        realize_vertex_drifts({v2(2.0 / 3, 1.0 / 3), v2(-1.0 / 3, -2.0 / 3), v2(-1.0 / 3, 1.0 / 3)}, 1.5);
    const RegimeTree t = classify_multi(p, 3);
    REQUIRE(t.root.conditions);
    REQUIRE(t.root.conditions->spectral);
    CHECK(t.root.conditions->spectral->verdict == SpectralVerdict::Indefinite);
    CHECK(t.root.verdict == Verdict::Inconclusive);
    CHECK(t.root.is_leaf());
    CHECK_FALSE(t.root.notes.empty());
  }
  SUBCASE("uniform dominance in a two-model problem") {
    const RegimeTree t = classify_multi(kDominate, 3);
    CHECK(t.root.verdict == Verdict::UniformDominance);
    REQUIRE(t.root.children.size() == 1);
    CHECK(t.root.children[0].models == std::vector<ModelIndex>{0});
  }
  SUBCASE("depth cap") {
    const RegimeTree t = classify_multi(kDominate, 0);
    CHECK(t.root.verdict == Verdict::Inconclusive);
  }
}

TEST_CASE("small-noise gate decides the spectral verdicts") {
  // Scaled-down drifts keep the noise under the threshold.
  const double eps = 0.01;
  const std::vector<Eigen::VectorXd> neg{eps * v2(-2, -0.5), eps * v2(0.5, -2), eps * v2(1.5, 2)};
  const RegimeTree tn = classify_multi(realize_vertex_drifts(neg, 1.0), 3);
  REQUIRE(tn.root.conditions->noise);
  CHECK(tn.root.conditions->noise->small_noise_ok);
  CHECK(tn.root.verdict == Verdict::InteriorErgodic);

  std::vector<Eigen::VectorXd> pos;
  for (const auto& d : neg) pos.push_back(-d);
  const RegimeTree tp = classify_multi(realize_vertex_drifts(pos, 1.0), 3);
  CHECK(tp.root.conditions->spectral->verdict == SpectralVerdict::PosDef);
  CHECK(tp.root.conditions->noise->small_noise_ok);
  CHECK_FALSE(tp.root.is_leaf());
  CHECK(tp.root.verdict != Verdict::InteriorErgodic);
}

TEST_CASE("two-model trees agree with the two-arm table when both are conclusive") {
  std::mt19937_64 gen(52);
  for (int trial = 0; trial < 300; ++trial) {
    const BanditProblem p = oracle::random_problem(gen, 2, 2);
    const TwoArmRegime r = classify_two_arm(p);
    const RegimeTree t = classify_multi(p, 3);
    if (t.root.verdict == Verdict::Inconclusive || r.knife_edge) continue;
    const bool ergodic_tree = t.root.verdict == Verdict::InteriorErgodic;
    CHECK(ergodic_tree == (r.label == TwoArmLabel::SelfDefeating));
  }
}

TEST_CASE("tree structure invariants") {
  std::mt19937_64 gen(53);
  for (int trial = 0; trial < 60; ++trial) {
    const BanditProblem p = oracle::random_problem(gen, 3 + trial % 2, 3);
    const RegimeTree t = classify_multi(p, 3);
    walk(t.root, [](const RegimeNode& n) {
      if (!n.is_leaf()) {
        CHECK(n.verdict != Verdict::InteriorErgodic);
        for (const auto& c : n.children) CHECK(c.models.size() < n.models.size());
      }
      if (n.models.size() == 1) CHECK(n.is_leaf());
    });
    for (const RegimeNode* leaf : leaves(t)) {
      const Verdict v = leaf->verdict;
      CHECK((v == Verdict::InteriorErgodic || v == Verdict::VertexSelection || v == Verdict::UniformDominance ||
             v == Verdict::Inconclusive));
    }
  }
}

TEST_CASE("invasion stability of vertices") {
  // Model 1 wins at its own action against both others.
  CHECK(face_is_invasion_stable(kDominate, {0}));
  CHECK_FALSE(face_is_invasion_stable(kDominate, {1}));
  CHECK(face_is_invasion_stable(kConfirm, {0}));
  CHECK(face_is_invasion_stable(kConfirm, {1}));
  CHECK_FALSE(face_is_invasion_stable(kDefeat, {0}));
  CHECK_FALSE(face_is_invasion_stable(kDefeat, {1}));
}
