#include <benchmark/benchmark.h>

#include "nirattack/camera.hpp"
#include "nirattack/mannequin.hpp"
#include "nirattack/render.hpp"

namespace {

using namespace nirattack;

void BM_RenderMannequin(benchmark::State& state) {
  const auto scheme = mannequin_scheme(false);
  const LabeledMesh mesh = make_mannequin(1, scheme);
  const int size = static_cast<int>(state.range(0));
  const CameraPose cam = look_at_origin(30, 5, 4, size, size, size * 500.0 / 416.0);
  for (auto _ : state) benchmark::DoNotOptimize(render_segmap(mesh, cam));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(mesh.faces().size()));
}
BENCHMARK(BM_RenderMannequin)->Arg(96)->Arg(416);

}  // namespace
