#include <benchmark/benchmark.h>

#include "speclearn/resource_grid.hpp"
#include "speclearn/rng.hpp"

using namespace speclearn;

namespace {

Tensor<float> random_image(int64_t h, int64_t w, uint64_t seed) {
  Rng rng(seed);
  Tensor<float> img({h, w});
  for (int64_t i = 0; i < img.size(); ++i) img[i] = static_cast<float>(rng.normal(-60, 12));
  return img;
}

void BM_OccupancyThreshold(benchmark::State& state) {
  const Tensor<float> img = random_image(256, 256, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(occupancy_threshold(img));
  }
}
BENCHMARK(BM_OccupancyThreshold);

void BM_ResourceGrid(benchmark::State& state) {
  const Tensor<float> img = random_image(256, 256, 2);
  const double delta = occupancy_threshold(img);
  for (auto _ : state) {
    benchmark::DoNotOptimize(grid_from_pixels(img, state.range(0), state.range(0), delta));
  }
}
BENCHMARK(BM_ResourceGrid)->Arg(4)->Arg(16);

}  // namespace

BENCHMARK_MAIN();
