#include "tslab/io.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "tslab/errors.hpp"
#include "tslab/rng.hpp"

namespace tslab {

using nlohmann::json;

namespace {

json vec(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json mat(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(vec(m.row(r).transpose()));
  return out;
}

json one_based(const std::vector<ModelIndex>& idx) {
  json out = json::array();
  for (int i : idx) out.push_back(i + 1);
  return out;
}

double number(const json& doc, const char* field) {
  const json& v = doc.at(field);
  if (!v.is_number()) throw InvalidProblem(field, "expected a number");
  return v.get<double>();
}

Eigen::VectorXd number_array(const json& v, const std::string& field) {
  if (!v.is_array()) throw InvalidProblem(field, "expected an array of numbers");
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw InvalidProblem(field, "entry " + std::to_string(i + 1) + " is not a number");
    out(static_cast<Eigen::Index>(i)) = v[i].get<double>();
  }
  return out;
}

// Shortest round-trip representation keeps CSV output byte-stable.
std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

BanditProblem parse_problem(const json& doc) {
  if (!doc.is_object()) throw InvalidProblem("<root>", "expected a JSON object");
  if (!doc.contains("models")) throw InvalidProblem("models", "missing");
  const json& rows = doc.at("models");
  if (!rows.is_array() || rows.empty()) throw InvalidProblem("models", "expected a non-empty array of rows");
  Eigen::Index cols = -1;
  Eigen::MatrixXd means;
  for (std::size_t m = 0; m < rows.size(); ++m) {
    Eigen::VectorXd row = number_array(rows[m], "models");
    if (cols < 0) {
      cols = row.size();
      means.resize(static_cast<Eigen::Index>(rows.size()), cols);
    } else if (row.size() != cols) {
      throw InvalidProblem("models", "rows have different lengths");
    }
    means.row(static_cast<Eigen::Index>(m)) = row.transpose();
  }
  double sigma = doc.contains("sigma") ? number(doc, "sigma") : 1.0;
  if (!doc.contains("true_means")) throw InvalidProblem("true_means", "missing");
  Eigen::VectorXd g = number_array(doc.at("true_means"), "true_means");
  double sigma_true = doc.contains("sigma_true") ? number(doc, "sigma_true") : 1.0;

  ModelClass models(means, sigma);
  TrueEnvironment env(g, sigma_true);
  if (!doc.contains("prior") || doc.at("prior").is_null()) return BanditProblem(std::move(models), std::move(env));
  Eigen::VectorXd p = number_array(doc.at("prior"), "prior");
  if (p.size() != models.num_models()) throw InvalidProblem("prior", "length differs from the number of models");
  try {
    return BanditProblem(std::move(models), std::move(env), Belief(p));
  } catch (const InvalidBelief& e) {
    throw InvalidProblem("prior", e.what());
  }
}

BanditProblem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidProblem("<file>", "cannot open " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidProblem("<file>", std::string("malformed JSON: ") + e.what());
  }
  return parse_problem(doc);
}

json to_json(const BanditProblem& problem) {
  return {{"models", mat(problem.models().means())},
          {"sigma", problem.models().sigma()},
          {"true_means", vec(problem.env().g)},
          {"sigma_true", problem.env().sigma_true},
          {"prior", vec(problem.prior().probs())}};
}

std::string hex_hash(std::uint64_t hash) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << hash;
  return os.str();
}

json provenance(std::uint64_t problem_hash, std::uint64_t master_seed) {
  return {{"problem_hash", hex_hash(problem_hash)},
          {"master_seed", master_seed},
          {"tool_version", kToolVersion},
          {"rng_algorithm", std::string(RngStream::kAlgorithm)}};
}

json to_json(const DriftGeometry& geom) {
  json d = json::array();
  for (const auto& v : geom.d_vectors) d.push_back(vec(v));
  json out{{"d_vectors", d},
           {"D", mat(geom.D)},
           {"G", mat(geom.G)},
           {"fixed_point", nullptr},
           {"s_star", nullptr},
           {"kernel_status", to_string(geom.kernel_status)},
           {"kernel_dimension", geom.kernel_dimension}};
  if (geom.fixed_point) out["fixed_point"] = vec(geom.fixed_point->probs());
  if (geom.s_star) out["s_star"] = vec(geom.s_star->values);
  return out;
}

json to_json(const ConditionReport& report) {
  json out{{"hull_status", to_string(report.hull.status)},
           {"hull_interior_margin", report.hull.interior_margin},
           {"spectral", nullptr},
           {"angle", nullptr},
           {"noise", nullptr},
           {"separating_direction", nullptr},
           {"irreducibility", to_string(report.irreducibility)}};
  if (report.hull.weights) out["hull_weights"] = vec(*report.hull.weights);
  if (report.spectral) {
    const auto& s = *report.spectral;
    out["spectral"] = {{"lambda_min", s.lambda_min},
                       {"lambda_max", s.lambda_max},
                       {"eigenvalues", vec(s.eigenvalues)},
                       {"verdict", to_string(s.verdict)}};
  }
  if (report.angle) {
    const auto& a = *report.angle;
    out["angle"] = {{"max", a.max_value},
                    {"samples", a.samples_per_radius},
                    {"radii", a.radii},
                    {"max_per_radius", a.max_per_radius},
                    {"holds", a.holds}};
  }
  if (report.noise) {
    const auto& n = *report.noise;
    out["noise"] = {{"sigma_bar_sq", n.sigma_bar_sq}, {"c_inf", n.c_inf},
                    {"L", n.L},                       {"lambda", n.lambda},
                    {"threshold", n.threshold},       {"small_noise_ok", n.small_noise_ok}};
  }
  if (report.hull.separating) {
    out["separating_direction"] = {{"w", vec(report.hull.separating->w)},
                                   {"margin", report.hull.separating->margin}};
  }
  return out;
}

json to_json(const TwoArmRegime& regime) {
  json out{{"label", to_string(regime.label)},
           {"deltas", regime.deltas},
           {"oriented_deltas", regime.oriented_deltas},
           {"agreement", regime.agreement},
           {"actions_swapped", regime.actions_swapped},
           {"knife_edge", regime.knife_edge},
           {"nu_action", regime.nu_action + 1},
           {"gamma_action", regime.gamma_action + 1},
           {"p_star_mean_field", nullptr},
           {"predicted_limit", regime.predicted_limit},
           {"predicted_regret", {{"formula", regime.predicted_regret.formula}, {"value", nullptr}}},
           {"notes", regime.notes}};
  if (regime.p_star_mean_field) out["p_star_mean_field"] = *regime.p_star_mean_field;
  if (regime.predicted_regret.value) out["predicted_regret"]["value"] = *regime.predicted_regret.value;
  return out;
}

json to_json(const RegimeNode& node) {
  json kids = json::array();
  for (const auto& c : node.children) kids.push_back(to_json(c));
  json out{{"model_subset", one_based(node.models)},
           {"verdict", to_string(node.verdict)},
           {"condition_report", nullptr},
           {"geometry", nullptr},
           {"sigma_bar_sq", node.sigma_bar_sq},
           {"notes", node.notes},
           {"children", kids}};
  if (node.conditions) out["condition_report"] = to_json(*node.conditions);
  if (node.geometry) out["geometry"] = to_json(*node.geometry);
  return out;
}

json to_json(const RegimeTree& tree) {
  return {{"problem_hash", hex_hash(tree.problem_hash)}, {"max_depth", tree.max_depth}, {"root", to_json(tree.root)}};
}

json to_json(const AbsorptionEstimate& est) {
  json out{{"s_abs", est.s_abs},
           {"horizon_cap", est.horizon_cap},
           {"reps", est.reps},
           {"initial_log_odds", est.initial_log_odds},
           {"absorbed_count", est.absorbed_count},
           {"absorbed_plus", est.absorbed_plus},
           {"censored_count", est.censored_count},
           {"p_hat", est.p_hat},
           {"ci", {est.ci.lo, est.ci.hi}},
           {"censored_fraction", est.censored_fraction},
           {"mean_absorption_time", est.mean_absorption_time},
           {"max_vertex_distance", est.max_vertex_distance},
           {"p_star_mean_field", nullptr}};
  if (est.p_star_mean_field) out["p_star_mean_field"] = *est.p_star_mean_field;
  return out;
}

json to_json(const StationaryEstimate& est) {
  return {{"burn_in", est.burn_in},
          {"horizon", est.horizon},
          {"chains", est.chains},
          {"bin_edges", est.bin_edges},
          {"counts", est.counts},
          {"alpha_star", vec(est.alpha_star)},
          {"alpha_star_ci", vec(est.alpha_star_ci)},
          {"action_freq", vec(est.action_freq)},
          {"average_regret", est.average_regret}};
}

json to_json(const McSummary& summary) {
  json faces = json::array();
  for (const auto& f : summary.surviving_faces) faces.push_back(one_based(f));
  json out{{"provenance", provenance(summary.problem_hash, summary.master_seed)},
           {"reps", summary.reps},
           {"horizon", summary.horizon},
           {"master_seed", summary.master_seed},
           {"window", summary.window},
           {"action_freq", vec(summary.action_freq)},
           {"action_freq_ci", vec(summary.action_freq_ci)},
           {"run_action_freq", vec(summary.run_action_freq)},
           {"final_mean_belief", nullptr},
           {"final_mean_regret", nullptr},
           {"surviving_faces", faces},
           {"absorption", nullptr},
           {"stationary", nullptr}};
  if (summary.mean_belief_path.rows() > 0) {
    out["final_mean_belief"] = vec(summary.mean_belief_path.bottomRows(1).transpose());
  }
  if (!summary.mean_regret_path.empty()) out["final_mean_regret"] = summary.mean_regret_path.back();
  if (summary.absorption) out["absorption"] = to_json(*summary.absorption);
  if (summary.stationary) out["stationary"] = to_json(*summary.stationary);
  return out;
}

json to_json(const TrajectoryMeta& meta) {
  json out = provenance(meta.problem_hash, meta.seed);
  out["rng_algorithm"] = meta.rng_algorithm;
  out["stream_id"] = meta.stream_id;
  out["horizon"] = meta.horizon;
  out["belief_stride"] = meta.belief_stride;
  return out;
}

json to_json(const KernelExperiment& exp) {
  return {{"m", exp.m},         {"trials", exp.trials},         {"hits", exp.hits},
          {"p_hat", exp.p_hat}, {"ci", {exp.ci.lo, exp.ci.hi}}, {"p_theory", exp.p_theory},
          {"degenerate_ci", exp.degenerate_ci}};
}

json to_json(const LimitingActions& limits) {
  json comps = json::array();
  for (const auto& c : limits.components) {
    comps.push_back({{"models", one_based(c.models)},
                     {"verdict", c.verdict},
                     {"weight", c.weight},
                     {"action_prob", vec(c.action_prob)}});
  }
  return {{"predicted", vec(limits.predicted)},
          {"empirical", vec(limits.empirical)},
          {"empirical_ci", vec(limits.empirical_ci)},
          {"predicted_regret", limits.predicted_regret},
          {"empirical_regret", limits.empirical_regret},
          {"components", comps}};
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const int m = traj.final_belief.size();
  os << "t,action,reward,instant_regret";
  for (int k = 1; k <= m; ++k) os << ",pi_" << k;
  os << '\n';
  std::size_t snap = 0;
  for (int t = 0; t < traj.horizon(); ++t) {
    os << t << ',' << traj.action[t] + 1 << ',' << fmt(traj.reward[t]) << ',' << fmt(traj.instant_regret[t]);
    bool have = snap < traj.belief_steps.size() && traj.belief_steps[snap] == t;
    for (int k = 0; k < m; ++k) {
      os << ',';
      if (have) os << fmt(traj.beliefs[snap][k]);
    }
    if (have) ++snap;
    os << '\n';
  }
}

void write_mean_path_csv(std::ostream& os, const McSummary& summary) {
  const auto m = summary.mean_belief_path.cols();
  os << 't';
  for (Eigen::Index k = 1; k <= m; ++k) os << ",mean_pi_" << k;
  os << ",mean_regret\n";
  for (Eigen::Index t = 0; t < summary.mean_belief_path.rows(); ++t) {
    os << t + 1;
    for (Eigen::Index k = 0; k < m; ++k) os << ',' << fmt(summary.mean_belief_path(t, k));
    os << ',' << fmt(summary.mean_regret_path[static_cast<std::size_t>(t)]) << '\n';
  }
}

void write_histogram_csv(std::ostream& os, const StationaryEstimate& est, int coordinate) {
  os << "bin_left,bin_right,count\n";
  const auto& counts = est.counts.at(static_cast<std::size_t>(coordinate));
  for (std::size_t b = 0; b < counts.size(); ++b) {
    os << fmt(est.bin_edges[b]) << ',' << fmt(est.bin_edges[b + 1]) << ',' << counts[b] << '\n';
  }
}

namespace {

std::string join(const Eigen::VectorXd& v) {
  std::ostringstream os;
  os << std::setprecision(4) << '(';
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v(i);
  os << ')';
  return os.str();
}

void render_node(std::ostringstream& os, const RegimeNode& node, int depth) {
  std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  os << pad << "{";
  for (std::size_t i = 0; i < node.models.size(); ++i) os << (i ? "," : "") << node.models[i] + 1;
  os << "}  " << to_string(node.verdict) << '\n';
  if (node.conditions) {
    const auto& c = *node.conditions;
    os << pad << "  hull " << to_string(c.hull.status) << " margin " << c.hull.interior_margin;
    if (c.hull.separating) os << "  w " << join(c.hull.separating->w) << " c " << c.hull.separating->margin;
    os << '\n';
    if (c.spectral) {
      os << pad << "  Sym(G) " << to_string(c.spectral->verdict) << " lambda in [" << c.spectral->lambda_min << ", "
         << c.spectral->lambda_max << "]\n";
    }
    if (c.noise) {
      os << pad << "  noise sigma_bar^2 " << c.noise->sigma_bar_sq << " threshold " << c.noise->threshold
         << (c.noise->small_noise_ok ? " ok" : " exceeded") << '\n';
    }
    if (c.angle) {
      os << pad << "  angle max " << c.angle->max_value << (c.angle->holds ? " (holds)" : " (fails)") << '\n';
    }
  }
  if (node.geometry && node.geometry->fixed_point) {
    os << pad << "  pi* " << join(node.geometry->fixed_point->probs()) << '\n';
  }
  for (const auto& n : node.notes) os << pad << "  - " << n << '\n';
  for (const auto& c : node.children) render_node(os, c, depth + 1);
}

}  // namespace

std::string render_tree(const RegimeTree& tree) {
  std::ostringstream os;
  os << "regime tree (problem " << hex_hash(tree.problem_hash) << ")\n";
  render_node(os, tree.root, 0);
  return os.str();
}

std::string render_two_arm(const TwoArmRegime& regime) {
  std::ostringstream os;
  os << "label " << to_string(regime.label) << '\n';
  os << "Delta (" << regime.deltas[0] << ", " << regime.deltas[1] << ")"
     << (regime.agreement ? " agreement" : " disagreement") << '\n';
  if (regime.p_star_mean_field) os << "p* (mean field) " << *regime.p_star_mean_field << '\n';
  os << "limit " << regime.predicted_limit << '\n';
  os << "regret " << regime.predicted_regret.formula;
  if (regime.predicted_regret.value) os << " = " << *regime.predicted_regret.value;
  os << '\n';
  for (const auto& n : regime.notes) os << "- " << n << '\n';
  return os.str();
}

}  // namespace tslab
