#include <benchmark/benchmark.h>

#include "psd/affinity.hpp"
#include "psd/camera.hpp"
#include "psd/pipeline.hpp"
#include "psd/prefill.hpp"
#include "psd/propagation.hpp"
#include "psd/sampling.hpp"
#include "psd/spatial_index.hpp"
#include "psd/synth.hpp"

namespace {

using namespace psd;

SyntheticScene scene_of_size(int size) {
  SceneSpec spec;
  spec.layout = random_room_layout(7);
  spec.height = size;
  spec.width = size;
  spec.gamma = 2.0;
  spec.rho = 0.1;
  return synth_scene(spec, 7);
}

void BM_Knn(benchmark::State& state) {
  const SyntheticScene scene = scene_of_size(static_cast<int>(state.range(0)));
  const SparseDepth sparse = sample_random(scene.gt_depth, kStandardSamplingRate, 1);
  const PointCloud cloud = backproject(scene.gt_depth, scene.intrinsics, &sparse);
  const SpatialIndex index(cloud);
  const auto k = static_cast<std::size_t>(state.range(1));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(index.knn(cloud.points[i], k));
    i = (i + 7919) % cloud.size();
  }
}
BENCHMARK(BM_Knn)->Args({64, 1})->Args({256, 1})->Args({256, 8});

void BM_Prefill(benchmark::State& state) {
  const SyntheticScene scene = scene_of_size(static_cast<int>(state.range(0)));
  const SparseDepth sparse = sample_random(scene.gt_depth, kStandardSamplingRate, 1);
  for (auto _ : state) benchmark::DoNotOptimize(prefill_gaussian(sparse, PrefillParams{}));
}
BENCHMARK(BM_Prefill)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Propagate2D(benchmark::State& state) {
  const SyntheticScene scene = scene_of_size(static_cast<int>(state.range(0)));
  const SparseDepth sparse = sample_random(scene.gt_depth, kStandardSamplingRate, 1);
  const FeatureMap features(fallback_features(scene.rgb));
  const Raster input = prefill_gaussian(sparse, PrefillParams{});
  for (auto _ : state) benchmark::DoNotOptimize(propagate_2d(input, sparse, features, 24, true));
}
BENCHMARK(BM_Propagate2D)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Pipeline(benchmark::State& state) {
  const SyntheticScene scene = scene_of_size(static_cast<int>(state.range(0)));
  PipelineInputs in;
  in.relative = scene.relative_depth;
  in.sparse = sample_random(scene.gt_depth, kStandardSamplingRate, 1);
  in.intrinsics = scene.intrinsics;
  in.rgb = scene.rgb;
  for (auto _ : state) benchmark::DoNotOptimize(run_pipeline(in, PipelineConfig{}));
}
BENCHMARK(BM_Pipeline)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
