#include <benchmark/benchmark.h>

#include "nirattack/compositor.hpp"
#include "nirattack/detector.hpp"
#include "nirattack/mannequin.hpp"
#include "nirattack/render.hpp"

namespace {

using namespace nirattack;

struct Fixture {
  std::shared_ptr<const SegmentScheme> scheme = std::make_shared<const SegmentScheme>(mannequin_scheme(false));
  SegMap segmap = render_segmap(make_mannequin(2, *scheme), look_at_origin(0, 0, 3.5, 416, 416, 500));
  NirImage background = make_synthetic_background(3, 416, 416);
  BinaryPattern pattern = new_random(4, scheme);
};

void BM_SynthesizeAttack(benchmark::State& state) {
  const Fixture f;
  for (auto _ : state) benchmark::DoNotOptimize(synthesize_attack(f.segmap, f.pattern, f.background));
  state.SetBytesProcessed(state.iterations() * 416 * 416);
}
BENCHMARK(BM_SynthesizeAttack);

void BM_SyntheticDetect(benchmark::State& state) {
  const Fixture f;
  const NirImage img = synthesize_attack(f.segmap, f.pattern, f.background);
  const auto det = SyntheticDetector::random(5, 31, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(det.detect(img, f.segmap));
}
BENCHMARK(BM_SyntheticDetect);

}  // namespace
