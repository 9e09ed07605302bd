#include <benchmark/benchmark.h>

#include <random>

#include "tslab/classifier.hpp"
#include "tslab/construct.hpp"
#include "tslab/drift.hpp"
#include "tslab/engine.hpp"
#include "tslab/montecarlo.hpp"

using namespace tslab;

namespace {

BanditProblem random_problem(int m, int a, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> n;
  Eigen::MatrixXd means(m, a);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < a; ++j) means(i, j) = n(gen);
  Eigen::VectorXd g(a);
  for (int j = 0; j < a; ++j) g(j) = n(gen);
  return BanditProblem(ModelClass(means, 1.0), TrueEnvironment(g, 1.0));
}

BanditProblem self_defeating() {
  Eigen::MatrixXd m(2, 2);
  m << 1, -1, -1, 1;
  return BanditProblem(ModelClass(m, 1.0), TrueEnvironment(Eigen::Vector2d(-0.2, -0.6), 1.0));
}

}  // namespace

static void BM_SamplerStep(benchmark::State& state) {
  const BanditProblem p = random_problem(static_cast<int>(state.range(0)), 4, 1);
  ThompsonSampler ts(p, RngStream(1, 0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(ts.step());
    // keep the chain away from a vertex
    if (ts.log_odds().cwiseAbs().maxCoeff() > 30.0) ts.set_log_odds(Eigen::VectorXd::Zero(ts.num_models() - 1));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SamplerStep)->Arg(2)->Arg(5)->Arg(20);

static void BM_Episode(benchmark::State& state) {
  const BanditProblem p = self_defeating();
  for (auto _ : state) benchmark::DoNotOptimize(run_episode(p, static_cast<int>(state.range(0)), RngStream(2, 0)));
}
BENCHMARK(BM_Episode)->Arg(500)->Arg(10000);

static void BM_McBatch(benchmark::State& state) {
  const BanditProblem p = self_defeating();
  McOptions opts;
  opts.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(mc_batch(p, 500, static_cast<int>(state.range(0)), 3, opts));
}
BENCHMARK(BM_McBatch)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_BuildGeometry(benchmark::State& state) {
  const BanditProblem p = random_problem(static_cast<int>(state.range(0)), 4, 4);
  for (auto _ : state) benchmark::DoNotOptimize(build_geometry(p));
}
BENCHMARK(BM_BuildGeometry)->Arg(3)->Arg(6)->Arg(10);

static void BM_AngleTest(benchmark::State& state) {
  const DriftGeometry g = geometry_from_drifts({Eigen::Vector2d(-2, -0.5), Eigen::Vector2d(0.5, -2),
                                                Eigen::Vector2d(1.5, 2)});
  for (auto _ : state) {
    RngStream rng(5, 0);
    benchmark::DoNotOptimize(angle_test(g, kDefaultAngleRadii, kDefaultAngleSamples, rng));
  }
}
BENCHMARK(BM_AngleTest)->Unit(benchmark::kMicrosecond);

static void BM_ClassifyMulti(benchmark::State& state) {
  const BanditProblem p = random_problem(static_cast<int>(state.range(0)), 3, 6);
  for (auto _ : state) benchmark::DoNotOptimize(classify_multi(p, 3));
}
BENCHMARK(BM_ClassifyMulti)->Arg(3)->Arg(5)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
