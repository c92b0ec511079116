#include <benchmark/benchmark.h>

#include <random>

#include "bevlift/frustum.hpp"
#include "bevlift/grid_transform.hpp"
#include "bevlift/losses.hpp"
#include "bevlift/parallel.hpp"
#include "bevlift/pipeline.hpp"
#include "bevlift/synthetic.hpp"

using namespace bevlift;

namespace {

Tensor random_tensor(std::mt19937& rng, std::vector<std::size_t> shape,
                     float lo = 0.0f, float hi = 1.0f) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<float> dist(lo, hi);
  for (auto& v : t.data()) v = dist(rng);
  return t;
}

PipelineConfig bench_config(int downsample) {
  PipelineConfig cfg;
  cfg.calib = make_pinhole(128.0, 128.0, 64.0, 256, 128, downsample);
  cfg.disc.mode = DiscretizationMode::LID;
  cfg.disc.d_min = 2.0;
  cfg.disc.d_max = 46.8;
  cfg.disc.num_bins = 16;
  cfg.grid.x_range = {2.0, 46.8};
  cfg.grid.y_range = {-30.08, 30.08};
  cfg.grid.z_range = {-2.0, 1.2};
  cfg.grid.voxel_size = {0.64, 0.64, 0.64};
  return cfg;
}

}  // namespace

static void BM_softmax(benchmark::State& state) {
  std::mt19937 rng(1);
  Tensor logits = random_tensor(rng, {64, 32, 81}, -5.0f, 5.0f);
  for (auto _ : state) {
    benchmark::DoNotOptimize(softmax_normalize(logits));
  }
}
BENCHMARK(BM_softmax);

static void BM_lift(benchmark::State& state) {
  std::mt19937 rng(2);
  const std::size_t D = static_cast<std::size_t>(state.range(0));
  Tensor dist = random_tensor(rng, {64, 32, D});
  Tensor features = random_tensor(rng, {64, 32, 16}, -1.0f, 1.0f);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lift(dist, features));
  }
  state.SetItemsProcessed(state.iterations() * 64 * 32 * D * 16);
}
BENCHMARK(BM_lift)->Arg(16)->Arg(80);

static void BM_trilinear_sample(benchmark::State& state) {
  std::mt19937 rng(3);
  Tensor fr = random_tensor(rng, {64, 32, 16, 8}, -1.0f, 1.0f);
  const std::size_t n = 200000;
  Tensor coords({n, 3});
  std::uniform_real_distribution<float> cu(0.0f, 63.0f), cv(0.0f, 31.0f),
      cd(0.0f, 15.0f);
  for (std::size_t i = 0; i < n; ++i) {
    coords[i * 3 + 0] = cu(rng);
    coords[i * 3 + 1] = cv(rng);
    coords[i * 3 + 2] = cd(rng);
  }
  std::vector<std::uint8_t> mask(n, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(trilinear_sample(fr, coords, mask));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_trilinear_sample);

static void BM_trilinear_scatter(benchmark::State& state) {
  std::mt19937 rng(4);
  Tensor fr({64, 32, 16, 8});
  const std::size_t n = 200000;
  Tensor coords({n, 3});
  std::uniform_real_distribution<float> cu(0.0f, 63.0f), cv(0.0f, 31.0f),
      cd(0.0f, 15.0f);
  for (std::size_t i = 0; i < n; ++i) {
    coords[i * 3 + 0] = cu(rng);
    coords[i * 3 + 1] = cv(rng);
    coords[i * 3 + 2] = cd(rng);
  }
  std::vector<std::uint8_t> mask(n, 1);
  Tensor upstream = random_tensor(rng, {n, 8}, -1.0f, 1.0f);
  for (auto _ : state) {
    benchmark::DoNotOptimize(trilinear_sample_backward(fr, coords, mask, upstream));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_trilinear_scatter);

static void BM_depth_loss(benchmark::State& state) {
  std::mt19937 rng(5);
  Tensor logits = random_tensor(rng, {64, 32, 17}, -3.0f, 3.0f);
  Tensor dist = softmax_normalize(logits);
  Tensor labels({64, 32, 17});
  std::uniform_int_distribution<std::size_t> pick(0, 16);
  for (std::size_t p = 0; p < 64 * 32; ++p) labels[p * 17 + pick(rng)] = 1.0f;
  std::vector<std::uint8_t> fg(64 * 32, 0);
  for (std::size_t p = 0; p < fg.size(); p += 3) fg[p] = 1;
  LossWeights w;
  for (auto _ : state) {
    benchmark::DoNotOptimize(depth_loss(dist, labels, fg, w));
  }
}
BENCHMARK(BM_depth_loss);

static void BM_pipeline(benchmark::State& state) {
  set_max_threads(static_cast<int>(state.range(0)));
  auto cfg = bench_config(4);
  SyntheticScene scene;
  SceneBox box;
  box.center = {20.0, 1.0, -0.5};
  box.extents = {2.0, 2.0, 1.5};
  box.signature = std::vector<float>(8, 0.5f);
  scene.boxes.push_back(box);
  scene.sigma = 0.05;
  auto synth = synth_scene(scene, cfg.disc, cfg.calib);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        run_pipeline(synth.features, synth.logits, cfg, nullptr, nullptr));
  }
  set_max_threads(0);
}
BENCHMARK(BM_pipeline)->Arg(1)->Arg(4);

BENCHMARK_MAIN();
