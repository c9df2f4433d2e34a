#include <benchmark/benchmark.h>

#include "speclearn/model.hpp"
#include "speclearn/rng.hpp"

using namespace speclearn;

namespace {

ModelConfig scaled_config(int channels, int64_t height, int64_t width) {
  ModelConfig mc;
  mc.layers = 5;
  mc.channels = channels;
  mc.token_height = height;
  mc.token_width = width;
  mc.tokens_per_sentence = 16;
  mc.seg_hidden = channels / 2;
  return mc;
}

Tensor<float> random_tokens(const ModelConfig& mc, uint64_t seed) {
  Rng rng(seed);
  Tensor<float> x({mc.tokens_per_sentence, 1, mc.token_height, mc.token_width});
  for (int64_t i = 0; i < x.size(); ++i) x[i] = static_cast<float>(rng.normal());
  return x;
}

void BM_BackboneForward(benchmark::State& state) {
  const ModelConfig mc = scaled_config(static_cast<int>(state.range(0)), state.range(1),
                                       state.range(2));
  const auto params = init_weights<float>(mc, 3);
  const ConvLstmStack<float> stack(params);
  const Tensor<float> x = random_tokens(mc, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(stack.forward(x, nullptr));
  }
}
BENCHMARK(BM_BackboneForward)
    ->Args({16, 64, 4})
    ->Args({32, 64, 4})
    ->Args({64, 256, 16})
    ->Unit(benchmark::kMillisecond);

void BM_BackboneBackward(benchmark::State& state) {
  const ModelConfig mc = scaled_config(static_cast<int>(state.range(0)), state.range(1),
                                       state.range(2));
  const auto params = init_weights<float>(mc, 5);
  const ConvLstmStack<float> stack(params);
  const Tensor<float> x = random_tokens(mc, 6);
  auto grads = ModelParams<float>::shaped(mc);
  for (auto _ : state) {
    StackCache<float> cache;
    const Tensor<float> feats = stack.forward(x, &cache);
    Tensor<float> d_top(feats.shape());
    d_top.fill(1e-3f);
    stack.backward(cache, d_top, grads);
    benchmark::DoNotOptimize(grads);
  }
}
BENCHMARK(BM_BackboneBackward)->Args({16, 64, 4})->Unit(benchmark::kMillisecond);

void BM_SegHead(benchmark::State& state) {
  const ModelConfig mc = scaled_config(16, 64, 4);
  const auto params = init_weights<float>(mc, 7);
  Rng rng(8);
  Tensor<float> feats({mc.tokens_per_sentence, mc.channels, mc.token_height, mc.token_width});
  for (int64_t i = 0; i < feats.size(); ++i) feats[i] = static_cast<float>(rng.normal());
  for (auto _ : state) {
    benchmark::DoNotOptimize(seg_head_logits<float>(feats, params, nullptr));
  }
}
BENCHMARK(BM_SegHead)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
