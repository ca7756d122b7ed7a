#include <benchmark/benchmark.h>

#include "nirattack/dataset.hpp"
#include "nirattack/ga.hpp"
#include "nirattack/mannequin.hpp"
#include "nirattack/render.hpp"

namespace {

using namespace nirattack;

// One evolve_generation() step: breed N patterns and evaluate them on B
// scenes against the synthetic detector.
void BM_EvolveGeneration(benchmark::State& state) {
  const auto scheme = std::make_shared<const SegmentScheme>(mannequin_scheme(false));
  std::vector<std::shared_ptr<const SegMap>> maps;
  for (std::uint64_t i = 0; i < 16; ++i)
    maps.push_back(std::make_shared<const SegMap>(
        render_segmap(make_mannequin(i, *scheme), look_at_origin(22.5 * i, 5, 4, 96, 96, 115))));
  const SegMapSceneSource source(maps, BackgroundPool({make_synthetic_background(0, 96, 96)}));

  SearchConfig cfg;
  cfg.population = static_cast<std::size_t>(state.range(0));
  cfg.batch = static_cast<std::size_t>(state.range(1));
  cfg.p_mut = 0.1;
  const auto det = SyntheticDetector::random(1, 31, 2.0);
  const auto scenes = source.batch(cfg.batch, 1);
  const PopulationState start = evaluate_population(initial_population(cfg, scheme), scenes, det);
  for (auto _ : state) benchmark::DoNotOptimize(evolve_generation(start, cfg, scenes, det));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1));
}
BENCHMARK(BM_EvolveGeneration)->Args({200, 8})->Args({1000, 16})->Unit(benchmark::kMillisecond);

}  // namespace
