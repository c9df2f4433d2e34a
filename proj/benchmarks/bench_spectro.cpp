#include <benchmark/benchmark.h>

#include "speclearn/rng.hpp"
#include "speclearn/spectrogram.hpp"

using namespace speclearn;

namespace {

IQRecording white_recording(double fs, int64_t n) {
  IQRecording rec;
  rec.sample_rate_hz = fs;
  Rng rng(1);
  rec.samples.reserve(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) {
    const auto z = rng.cnormal(1.0);
    rec.samples.emplace_back(static_cast<float>(z.real()), static_cast<float>(z.imag()));
  }
  return rec;
}

void BM_StftSlice(benchmark::State& state) {
  // one 2 ms slice at the given sample rate, default spectrogram parameters
  const double fs = static_cast<double>(state.range(0));
  const IQRecording rec = white_recording(fs, static_cast<int64_t>(fs * 2e-3));
  const SpectroParams p;
  for (auto _ : state) {
    benchmark::DoNotOptimize(stft_spectrogram(rec, p));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(rec.samples.size()));
}
BENCHMARK(BM_StftSlice)->Arg(7680000)->Arg(61440000)->Unit(benchmark::kMillisecond);

void BM_Resize(benchmark::State& state) {
  Rng rng(2);
  Tensor<float> img({1024, static_cast<int64_t>(state.range(0))});
  for (int64_t i = 0; i < img.size(); ++i) img[i] = static_cast<float>(rng.normal());
  for (auto _ : state) {
    benchmark::DoNotOptimize(resize_image(img, 256, 256));
  }
}
BENCHMARK(BM_Resize)->Arg(150)->Arg(4799)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
