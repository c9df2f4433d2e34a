#pragma once

#include <functional>
#include <string>
#include <vector>

#include "speclearn/model.hpp"
#include "speclearn/resource_grid.hpp"
#include "speclearn/segdata.hpp"
#include "speclearn/sentence.hpp"

namespace speclearn {

// Predicts the next token (F, W) from a context window (T, F, W).
using Forecaster = std::function<Tensor<float>(const Tensor<float>&)>;

// Autoregressive rollout with a sliding context window of fixed length:
// predict, append, drop the oldest. Returns (steps, F, W).
Tensor<float> rollout_forecast(const Forecaster& model, const Tensor<float>& context, int steps);

// Model-backed forecaster (owns a copy of the parameters).
Forecaster model_forecaster(ModelParams<float> params);

// Per-pixel argmax class prediction for a raw spectrogram image.
LabelImage predict_segmentation(const ModelParams<float>& params, const Tensor<float>& spec_img);

struct BlockRes {
  double time_ms = 1.0;
  double freq_mhz = 5.0;
  std::string label() const;
};

struct RecallCell {
  int64_t hits = 0;
  int64_t occupied = 0;
  double recall() const { return occupied == 0 ? 0.0 : static_cast<double>(hits) / occupied; }
};

struct OccupancyReport {
  std::vector<BlockRes> blocks;
  int steps = 4;
  // Micro-averaged over sentences: per resolution pooled across the horizon,
  // and binned by the rollout step owning each block's time center.
  std::vector<RecallCell> pooled;                  // [block]
  std::vector<std::vector<RecallCell>> per_step;   // [block][step]
};

// For each sentence: context = first T-steps tokens, roll out `steps`, build
// predicted and true grids over the future region (de-standardized, both
// thresholded at mean + 0.5 std of the true region), and accumulate
// occupied recall.
OccupancyReport forecast_occupancy_eval(const Forecaster& model,
                                        const std::vector<const SentenceTokens*>& sentences,
                                        const std::vector<BlockRes>& blocks, int steps = 4);

}  // namespace speclearn
