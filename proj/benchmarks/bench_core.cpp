#include <benchmark/benchmark.h>

#include <cmath>
#include <optional>
#include <vector>

#include "denserew/gchrl_shaping.hpp"
#include "denserew/graph_autoencoder.hpp"
#include "denserew/random.hpp"
#include "denserew/shapley_credit.hpp"
#include "denserew/spectral_transfer.hpp"
#include "denserew/state_graph.hpp"

using namespace denserew;

namespace {

// Additive game with a pairwise interaction, so every coalition costs a
// few flops and the benchmark measures the credit algorithm itself.
scar::CoalitionGame synthetic_game(std::size_t n) {
  std::vector<double> w(n);
  Rng rng(n);
  for (auto& x : w) x = uniform(rng, -1, 1);
  return scar::CoalitionGame(n, [w](scar::Coalition s) {
    double v = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
      if (s >> i & 1) v += w[i];
    return v + 0.1 * static_cast<double>((s & 3) == 3);
  });
}

graph::StateGraph random_walk_graph(std::size_t capacity, std::size_t steps, std::uint64_t seed) {
  auto g = graph::create_graph(capacity, 0.05, graph::EvictionPolicy::Oldest, 1);
  Rng rng(seed);
  std::optional<graph::NodeRef> prev;
  for (std::size_t t = 0; t < steps; ++t) {
    const std::vector<double> phi{uniform01(rng), uniform01(rng)};
    prev = g.observe_transition(prev, phi).node;
  }
  return g;
}

Matrix path_plus_chords(std::size_t n) {
  Matrix L(n, n);
  Rng rng(n);
  auto edge = [&](std::size_t i, std::size_t j, double w) {
    L(i, j) -= w;
    L(j, i) -= w;
    L(i, i) += w;
    L(j, j) += w;
  };
  for (std::size_t i = 0; i + 1 < n; ++i) edge(i, i + 1, uniform(rng, 0.5, 2.0));
  for (std::size_t k = 0; k < n; ++k) {
    const auto i = uniform_index(rng, n), j = uniform_index(rng, n);
    if (i != j) edge(i, j, uniform(rng, 0.1, 1.0));
  }
  return L;
}

}  // namespace

static void BM_ExactShapley(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    auto game = synthetic_game(n);
    benchmark::DoNotOptimize(scar::exact_shapley(game));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ExactShapley)->DenseRange(8, 16, 4)->Unit(benchmark::kMillisecond);

static void BM_OwenSentences(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  scar::CoalitionStructure cs;
  for (std::size_t i = 0; i < n; i += 4) {
    cs.unions.emplace_back();
    for (std::size_t j = i; j < std::min(n, i + 4); ++j) cs.unions.back().push_back(j);
  }
  for (auto _ : state) {
    auto game = synthetic_game(n);
    benchmark::DoNotOptimize(scar::owen_value(game, cs));
  }
}
BENCHMARK(BM_OwenSentences)->Arg(8)->Arg(16)->Arg(20)->Unit(benchmark::kMillisecond);

static void BM_HierarchicalOwen(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  scar::CoalitionStructure cs;
  cs.hierarchy = scar::balanced_hierarchy(n);
  std::size_t calls = 0;
  for (auto _ : state) {
    auto game = synthetic_game(n);
    benchmark::DoNotOptimize(scar::hierarchical_owen(game, cs));
    calls = game.oracle_calls();
  }
  state.counters["oracle_calls"] = static_cast<double>(calls);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_HierarchicalOwen)->RangeMultiplier(2)->Range(8, 64)->Complexity(benchmark::oNSquared);

static void BM_JacobiEigen(benchmark::State& state) {
  const auto L = path_plus_chords(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(spectral::spectral_summary(L));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_JacobiEigen)->RangeMultiplier(2)->Range(8, 64)->Complexity(benchmark::oNCubed);

static void BM_ObserveTransition(benchmark::State& state) {
  auto g = graph::create_graph(static_cast<std::size_t>(state.range(0)), 0.05, graph::EvictionPolicy::Oldest, 1);
  Rng rng(7);
  std::optional<graph::NodeRef> prev;
  for (auto _ : state) {
    const std::vector<double> phi{uniform01(rng), uniform01(rng)};
    prev = g.observe_transition(prev, phi).node;
  }
}
BENCHMARK(BM_ObserveTransition)->Arg(16)->Arg(64)->Arg(256);

static void BM_TrainPhase(benchmark::State& state) {
  const auto g = random_walk_graph(static_cast<std::size_t>(state.range(0)), 400, 3);
  const auto p0 = graph::default_encoder(2, 1);
  graph::TrainConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(graph::train_phase(p0, g, cfg));
}
BENCHMARK(BM_TrainPhase)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_FourRoomEpisodes(benchmark::State& state) {
  const auto env = g4rl::GridEnv::parse(g4rl::four_room_map(), g4rl::RewardMode::Sparse);
  const g4rl::ShapingConfig shaping;
  std::uint64_t seed = 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(g4rl::run_experiment(env, shaping, g4rl::Variant::Both, 100, seed++));
}
BENCHMARK(BM_FourRoomEpisodes)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
