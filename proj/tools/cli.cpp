#include "cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "tslab/classifier.hpp"
#include "tslab/drift.hpp"
#include "tslab/engine.hpp"
#include "tslab/errors.hpp"
#include "tslab/io.hpp"
#include "tslab/montecarlo.hpp"

namespace tslab::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Bad command-line parameters, as opposed to a bad problem file.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string problem_path;
  std::string out_dir = ".";
  std::uint64_t seed = 1;
};

struct ClassifyArgs {
  int max_depth = 3;
};

struct SimulateArgs {
  int horizon = 500;
  std::uint64_t stream = 0;
  int stride = 1;
};

struct McArgs {
  int horizon = 500;
  int reps = 300;
  int threads = 0;
  double s_abs = kDefaultAbsorptionThreshold;
  int abs_cap = 10000;
  int abs_reps = 2000;
  int stat_horizon = 100000;
  double burn_in_fraction = kDefaultBurnInFraction;
  int chains = 20;
  int bins = kDefaultBins;
  double eps_face = kDefaultEpsFace;
  int max_depth = 3;
};

struct FieldArgs {
  double lo = -10.0;
  double hi = 10.0;
  int resolution = 41;
  std::vector<double> slice;
  std::vector<int> axes{1, 2};
};

struct KernelArgs {
  std::vector<int> m_list{2, 3, 4, 5, 6};
  long trials = 100000;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

fs::path prepare_out(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir);
  return p;
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << doc.dump(2) << '\n';
}

std::ofstream open_csv(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path.string());
  return f;
}

void write_meta(const fs::path& csv, json meta) {
  meta["file"] = csv.filename().string();
  fs::path side = csv;
  side.replace_extension(".meta.json");
  write_json(side, meta);
}

BanditProblem load(const Common& c) {
  require(!c.problem_path.empty(), "--problem is required");
  return load_problem(c.problem_path);
}

bool is_two_arm(const BanditProblem& p) { return p.num_models() == 2 && p.num_actions() == 2; }

int cmd_classify(const Common& c, const ClassifyArgs& a, std::ostream& out) {
  require(a.max_depth >= 1, "--max-depth must be at least 1");
  const BanditProblem problem = load(c);
  const fs::path dir = prepare_out(c.out_dir);
  json doc{{"provenance", provenance(problem.hash(), c.seed)}, {"problem", to_json(problem)}};
  std::string summary;
  if (is_two_arm(problem)) {
    const TwoArmRegime regime = classify_two_arm(problem);
    doc["two_arm"] = to_json(regime);
    summary += render_two_arm(regime);
  }
  ClassifyOptions opts;
  opts.angle_seed = c.seed;
  const RegimeTree tree = classify_multi(problem, a.max_depth, opts);
  doc["regime_tree"] = to_json(tree);
  summary += render_tree(tree);
  write_json(dir / "classification.json", doc);
  std::ofstream(dir / "classification.txt") << summary;
  out << summary;
  return kOk;
}

int cmd_simulate(const Common& c, const SimulateArgs& a, std::ostream& out) {
  require(a.horizon >= 1, "--horizon must be at least 1");
  require(a.stride >= 1, "--stride must be at least 1");
  const BanditProblem problem = load(c);
  const fs::path dir = prepare_out(c.out_dir);
  const Trajectory traj = run_episode(problem, a.horizon, RngStream(c.seed, a.stream), {a.stride});
  const fs::path csv = dir / "trajectory.csv";
  {
    auto f = open_csv(csv);
    write_trajectory_csv(f, traj);
  }
  write_meta(csv, to_json(traj.meta));
  const auto cum = cumulative_regret(traj);
  out << "horizon " << a.horizon << "  cumulative regret " << cum.back() << "  final belief (";
  for (int k = 0; k < traj.final_belief.size(); ++k) out << (k ? ", " : "") << traj.final_belief[k];
  out << ")\n";
  return kOk;
}

int cmd_mc(const Common& c, const McArgs& a, std::ostream& out) {
  require(a.horizon >= 1, "--horizon must be at least 1");
  require(a.reps >= 1, "--reps must be at least 1");
  require(a.s_abs > 0.0, "--s-abs must be positive");
  require(a.abs_cap >= 1 && a.abs_reps >= 1, "--abs-cap and --abs-reps must be positive");
  require(a.stat_horizon >= 2 && a.chains >= 1 && a.bins >= 1, "stationary parameters must be positive");
  require(a.burn_in_fraction >= 0.0 && a.burn_in_fraction < 1.0, "--burn-in must lie in [0, 1)");
  require(a.eps_face > 0.0 && a.eps_face < 1.0, "--eps-face must lie in (0, 1)");
  require(a.threads >= 0, "--threads must be non-negative");
  const BanditProblem problem = load(c);
  const fs::path dir = prepare_out(c.out_dir);

  McOptions opts;
  opts.eps_face = a.eps_face;
  opts.threads = a.threads;
  McSummary summary = mc_batch(problem, a.horizon, a.reps, c.seed, opts);

  ClassifyOptions copts;
  copts.angle_seed = c.seed;
  const RegimeTree tree = classify_multi(problem, a.max_depth, copts);
  std::optional<TwoArmRegime> regime;
  if (is_two_arm(problem)) regime = classify_two_arm(problem);

  const bool absorbing = regime && regime->label == TwoArmLabel::SelfConfirming;
  const bool ergodic = (regime && regime->label == TwoArmLabel::SelfDefeating) ||
                       tree.root.verdict == Verdict::InteriorErgodic;
  if (absorbing) {
    AbsorptionEstimate est = estimate_absorption(problem, a.s_abs, a.abs_cap, a.abs_reps, c.seed, a.threads);
    est.p_star_mean_field = regime->p_star_mean_field;
    summary.absorption = est;
  }
  if (ergodic) {
    const int burn = static_cast<int>(a.burn_in_fraction * a.stat_horizon);
    summary.stationary = estimate_stationary(problem, burn, a.stat_horizon, a.bins, c.seed, a.chains, a.threads);
  }

  json doc = to_json(summary);
  doc["regime_tree"] = to_json(tree);
  if (regime) {
    std::optional<double> mixing;
    if (summary.absorption && summary.absorption->absorbed_count > 0) mixing = summary.absorption->p_hat;
    if (summary.stationary) mixing = summary.stationary->alpha_star(0);
    regime->predicted_regret = predicted_two_arm_regret(*regime, problem.env(), mixing);
    doc["two_arm"] = to_json(*regime);
  }
  doc["limiting_actions"] = to_json(limiting_action_frequencies(problem, summary, tree));
  write_json(dir / "summary.json", doc);

  const json meta = provenance(problem.hash(), c.seed);
  const fs::path path_csv = dir / "mean_path.csv";
  {
    auto f = open_csv(path_csv);
    write_mean_path_csv(f, summary);
  }
  write_meta(path_csv, meta);

  const fs::path term_csv = dir / "terminal_beliefs.csv";
  {
    auto f = open_csv(term_csv);
    f << "rep";
    for (int k = 1; k <= problem.num_models(); ++k) f << ",pi_" << k;
    f << '\n';
    f.precision(17);
    for (Eigen::Index r = 0; r < summary.terminal_beliefs.rows(); ++r) {
      f << r;
      for (Eigen::Index k = 0; k < summary.terminal_beliefs.cols(); ++k) f << ',' << summary.terminal_beliefs(r, k);
      f << '\n';
    }
  }
  write_meta(term_csv, meta);

  if (summary.stationary) {
    for (int k = 0; k + 1 < problem.num_models(); ++k) {
      const fs::path h = problem.num_models() == 2 ? dir / "histogram.csv"
                                                   : dir / ("histogram_pi_" + std::to_string(k + 1) + ".csv");
      {
        auto f = open_csv(h);
        write_histogram_csv(f, *summary.stationary, k);
      }
      json hm = meta;
      hm["coordinate"] = "pi_" + std::to_string(k + 1);
      write_meta(h, hm);
    }
  }

  out << "reps " << a.reps << "  horizon " << a.horizon << "  final mean regret " << summary.mean_regret_path.back()
      << '\n';
  out << "verdict " << to_string(tree.root.verdict);
  if (regime) out << "  two-arm " << to_string(regime->label);
  out << '\n';
  if (summary.absorption) {
    const auto& e = *summary.absorption;
    out << "absorption p_hat " << e.p_hat << " [" << e.ci.lo << ", " << e.ci.hi << "]  censored " << e.censored_count
        << '/' << e.reps << '\n';
  }
  if (summary.stationary) {
    out << "stationary alpha* " << summary.stationary->alpha_star(0) << "  average regret "
        << summary.stationary->average_regret << '\n';
  }
  return kOk;
}

int cmd_field(const Common& c, const FieldArgs& a, std::ostream& out) {
  require(a.resolution >= 1, "--resolution must be at least 1");
  require(a.hi > a.lo, "--range needs lo < hi");
  const BanditProblem problem = load(c);
  const int dim = problem.num_models() - 1;
  std::vector<int> free_axes;
  Eigen::VectorXd base = Eigen::VectorXd::Zero(dim);
  if (dim <= 2) {
    for (int i = 0; i < dim; ++i) free_axes.push_back(i);
  } else {
    require(!a.slice.empty(), "problems with more than three models need --slice");
    require(static_cast<int>(a.slice.size()) == dim, "--slice needs one value per log-odds coordinate");
    require(a.axes.size() == 2 && a.axes[0] != a.axes[1], "--axes needs two distinct coordinates");
    for (int ax : a.axes) {
      require(ax >= 1 && ax <= dim, "--axes out of range");
      free_axes.push_back(ax - 1);
    }
    for (int i = 0; i < dim; ++i) base(i) = a.slice[static_cast<std::size_t>(i)];
  }
  const fs::path dir = prepare_out(c.out_dir);
  const DriftGeometry geom = build_geometry(problem);

  const fs::path csv = dir / "field.csv";
  auto f = open_csv(csv);
  for (int i = 1; i <= dim; ++i) f << (i > 1 ? "," : "") << 's' << i;
  for (int i = 1; i <= dim; ++i) f << ",xi_" << i;
  for (int i = 1; i <= dim + 1; ++i) f << ",pi_" << i;
  f << '\n';
  f.precision(17);
  const int n = a.resolution;
  auto coord = [&](int i) { return n == 1 ? 0.5 * (a.lo + a.hi) : a.lo + (a.hi - a.lo) * i / (n - 1); };
  const int outer = free_axes.size() == 2 ? n : 1;
  for (int i = 0; i < outer; ++i) {
    for (int j = 0; j < n; ++j) {
      LogOdds s{base};
      if (free_axes.size() == 2) {
        s.values(free_axes[0]) = coord(i);
        s.values(free_axes[1]) = coord(j);
      } else {
        s.values(free_axes[0]) = coord(j);
      }
      const Eigen::VectorXd xi = mean_drift(geom, s);
      const Belief pi = softmax(s);
      for (int k = 0; k < dim; ++k) f << (k ? "," : "") << s.values(k);
      for (int k = 0; k < dim; ++k) f << ',' << xi(k);
      for (int k = 0; k <= dim; ++k) f << ',' << pi[k];
      f << '\n';
    }
  }
  f.close();
  json meta = provenance(problem.hash(), c.seed);
  meta["geometry"] = to_json(geom);
  write_meta(csv, meta);
  out << "wrote " << outer * n << " grid points to " << csv.string() << '\n';
  return kOk;
}

int cmd_kernel(const Common& c, const KernelArgs& a, std::ostream& out) {
  require(!a.m_list.empty(), "--m needs at least one value");
  for (int m : a.m_list) require(m >= 2, "every --m value must be at least 2");
  require(a.trials >= 1, "--trials must be at least 1");
  const fs::path dir = prepare_out(c.out_dir);
  const fs::path csv = dir / "kernel.csv";
  json rows = json::array();
  {
    auto f = open_csv(csv);
    f << "m,p_hat,ci_lo,ci_hi,p_theory\n";
    f.precision(17);
    for (int m : a.m_list) {
      const KernelExperiment e = kernel_simplex_experiment(m, a.trials, c.seed);
      f << m << ',' << e.p_hat << ',' << e.ci.lo << ',' << e.ci.hi << ',' << e.p_theory << '\n';
      rows.push_back(to_json(e));
      out << "m " << m << "  p_hat " << e.p_hat << "  theory " << e.p_theory
          << (e.degenerate_ci ? "  (degenerate CI)" : "") << '\n';
    }
  }
  json meta = provenance(0, c.seed);
  meta.erase("problem_hash");
  meta["trials"] = a.trials;
  meta["rows"] = rows;
  write_meta(csv, meta);
  return kOk;
}

void add_common(CLI::App* sub, Common& c, bool needs_problem) {
  auto* opt = sub->add_option("--problem", c.problem_path, "problem JSON file");
  if (needs_problem) opt->required();
  sub->add_option("--out", c.out_dir, "output directory")->capture_default_str();
  sub->add_option("--seed", c.seed, "master seed")->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Thompson Sampling laboratory for misspecified finite model classes", "tslab"};
  app.require_subcommand(1);

  Common common;
  ClassifyArgs ca;
  SimulateArgs sa;
  McArgs ma;
  FieldArgs fa;
  KernelArgs ka;
  std::vector<double> range;

  auto* classify = app.add_subcommand("classify", "regime classification of a problem");
  add_common(classify, common, true);
  classify->add_option("--max-depth", ca.max_depth, "face recursion depth")->capture_default_str();

  auto* simulate = app.add_subcommand("simulate", "one Thompson Sampling trajectory");
  add_common(simulate, common, true);
  simulate->add_option("--horizon", sa.horizon)->capture_default_str();
  simulate->add_option("--stream", sa.stream, "RNG stream id")->capture_default_str();
  simulate->add_option("--stride", sa.stride, "belief snapshot stride")->capture_default_str();

  auto* mc = app.add_subcommand("mc", "Monte Carlo replications with absorption or stationary estimates");
  add_common(mc, common, true);
  mc->add_option("--horizon", ma.horizon)->capture_default_str();
  mc->add_option("--reps", ma.reps)->capture_default_str();
  mc->add_option("--threads", ma.threads, "0 uses all cores")->capture_default_str();
  mc->add_option("--s-abs", ma.s_abs, "absorption threshold on |S|")->capture_default_str();
  mc->add_option("--abs-cap", ma.abs_cap, "step cap per absorption run")->capture_default_str();
  mc->add_option("--abs-reps", ma.abs_reps, "absorption replications")->capture_default_str();
  mc->add_option("--stat-horizon", ma.stat_horizon, "stationary chain length")->capture_default_str();
  mc->add_option("--burn-in", ma.burn_in_fraction, "burn-in fraction")->capture_default_str();
  mc->add_option("--chains", ma.chains)->capture_default_str();
  mc->add_option("--bins", ma.bins)->capture_default_str();
  mc->add_option("--eps-face", ma.eps_face)->capture_default_str();
  mc->add_option("--max-depth", ma.max_depth)->capture_default_str();

  auto* field = app.add_subcommand("field", "mean drift on a log-odds grid");
  add_common(field, common, true);
  field->add_option("--range", range, "lo hi")->expected(2);
  field->add_option("--resolution", fa.resolution)->capture_default_str();
  field->add_option("--slice", fa.slice, "base point, one value per coordinate")->delimiter(',');
  field->add_option("--axes", fa.axes, "two free coordinates (1-based)")->delimiter(',');

  auto* kernel = app.add_subcommand("kernel-exp", "kernel-meets-simplex frequency experiment");
  add_common(kernel, common, false);
  kernel->add_option("--m", ka.m_list, "list of m values")->delimiter(',');
  kernel->add_option("--trials", ka.trials)->capture_default_str();

  std::vector<const char*> argv{"tslab"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
  if (range.size() == 2) {
    fa.lo = range[0];
    fa.hi = range[1];
  }

  try {
    if (*classify) return cmd_classify(common, ca, out);
    if (*simulate) return cmd_simulate(common, sa, out);
    if (*mc) return cmd_mc(common, ma, out);
    if (*field) return cmd_field(common, fa, out);
    return cmd_kernel(common, ka, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const InvalidProblem& e) {
    // An unreadable or malformed file is a configuration problem.
    err << (e.field() == "<file>" ? "config error: " : "invalid problem: ") << e.what() << '\n';
    return e.field() == "<file>" ? kConfigError : kProblemError;
  } catch (const std::exception& e) {
    err << "invalid problem: " << e.what() << '\n';
    return kProblemError;
  }
}

}  // namespace tslab::cli
