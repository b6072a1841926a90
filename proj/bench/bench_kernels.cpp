// Serial reference kernels vs their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "drtraffic/config.hpp"
#include "drtraffic/frenet.hpp"
#include "drtraffic/harness.hpp"
#include "drtraffic/merging_env.hpp"

using namespace drtraffic;

namespace {

struct Fan {
  PlannerConfig cfg;
  std::vector<CandidateTrajectory> cands;
  std::vector<Obstacle> obstacles;
};

Fan make_fan(int lateral_samples) {
  Fan f;
  f.cfg.lateral_offsets.clear();
  for (int i = 0; i < lateral_samples; ++i)
    f.cfg.lateral_offsets.push_back(-1.0 + 2.0 * i / std::max(1, lateral_samples - 1));
  f.cfg.speed_offsets = {-3, -2, -1, 0, 1, 2, 3};
  FrenetState cur;
  cur.s = 100;
  cur.s_d = 7;
  cur.d = 1.6;
  const std::vector<double> centers{1.6, 4.8};
  f.cands = generate_candidates(cur, 8.0, centers, f.cfg);
  f.obstacles = {{125, 6, 1.6, 5}, {90, 9, 4.8, 5}, {140, 7, 4.8, 5}};
  return f;
}

void BM_ScoreSerial(benchmark::State& state) {
  Fan f = make_fan(static_cast<int>(state.range(0)));
  const ScoringContext ctx{8.0, 1.6, f.obstacles};
  for (auto _ : state) {
    score_candidates_serial(f.cands, ctx, f.cfg);
    benchmark::DoNotOptimize(f.cands.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.cands.size()));
}

void BM_ScoreParallel(benchmark::State& state) {
  Fan f = make_fan(static_cast<int>(state.range(0)));
  const ScoringContext ctx{8.0, 1.6, f.obstacles};
  for (auto _ : state) {
    score_candidates_parallel(f.cands, ctx, f.cfg);
    benchmark::DoNotOptimize(f.cands.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.cands.size()));
}

void run_eval(benchmark::State& state, bool parallel) {
  const RunConfig cfg = RunConfig::defaults(Scene::kMerging);
  const EnvConfig env = test_env(cfg, TrafficMode::kRuleBasedRandomized);
  const SacAgent agent(kMergingObsDim, {{-4.5}, {2.5}, 0}, MergingEnv(env).observation_scale(),
                       cfg.sac, 1);
  EvalOptions opt;
  opt.episodes = static_cast<int>(state.range(0));
  opt.parallel = parallel;
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_episodes(env, agent, opt));
  state.SetItemsProcessed(state.iterations() * opt.episodes);
}

void BM_EvalSerial(benchmark::State& state) { run_eval(state, false); }
void BM_EvalParallel(benchmark::State& state) { run_eval(state, true); }

}  // namespace

BENCHMARK(BM_ScoreSerial)->Arg(3)->Arg(21)->Arg(101);
BENCHMARK(BM_ScoreParallel)->Arg(3)->Arg(21)->Arg(101);
BENCHMARK(BM_EvalSerial)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EvalParallel)->Arg(16)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
