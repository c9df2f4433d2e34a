#include "speclearn/rollout.hpp"

#include <cmath>
#include <memory>
#include <sstream>

#include "speclearn/errors.hpp"
#include "speclearn/trainer.hpp"

namespace speclearn {

Tensor<float> rollout_forecast(const Forecaster& model, const Tensor<float>& context, int steps) {
  if (steps < 1) throw ConfigError("rollout needs steps >= 1");
  if (context.rank() != 3 || context.dim(0) < 1) {
    throw DimensionError("context must be a nonempty (T, F, W) tensor");
  }
  const int64_t t_len = context.dim(0), f = context.dim(1), w = context.dim(2);
  const int64_t token = f * w;

  Tensor<float> window = context;
  Tensor<float> out({steps, f, w});
  for (int s = 0; s < steps; ++s) {
    const Tensor<float> next = model(window);
    if (next.size() != token) throw DimensionError("forecaster returned a wrong-size token");
    std::copy(next.data(), next.data() + token, out.data() + s * token);
    // slide: drop the oldest token, append the prediction
    Tensor<float> shifted({t_len, f, w});
    std::copy(window.data() + token, window.data() + t_len * token, shifted.data());
    std::copy(next.data(), next.data() + token, shifted.data() + (t_len - 1) * token);
    window = std::move(shifted);
  }
  return out;
}

Forecaster model_forecaster(ModelParams<float> params) {
  auto shared = std::make_shared<ModelParams<float>>(std::move(params));
  auto stack = std::make_shared<ConvLstmStack<float>>(*shared);
  return [shared, stack](const Tensor<float>& window) {
    const Tensor<float> x = tokens_to_input(window);
    const Tensor<float> feats = stack->forward(x, nullptr);
    const Tensor<float> out =
        conv3d_head_forward(feats, shared->forecast_kernel, shared->forecast_bias);
    Tensor<float> token({window.dim(1), window.dim(2)});
    std::copy(out.data(), out.data() + token.size(), token.data());
    return token;
  };
}

LabelImage predict_segmentation(const ModelParams<float>& params, const Tensor<float>& spec_img) {
  const SentenceTokens s = sentence_from_image(spec_img, params.cfg.tokens_per_sentence);
  const ConvLstmStack<float> stack(params);
  const Tensor<float> feats = stack.forward(tokens_to_input(s.tokens), nullptr);
  const Tensor<float> logits = seg_head_logits<float>(feats, params, nullptr);
  const int64_t k = logits.dim(0);
  const int64_t plane = logits.dim(1) * logits.dim(2);
  LabelImage out({logits.dim(1), logits.dim(2)});
  for (int64_t j = 0; j < plane; ++j) {
    int64_t best = 0;
    float best_v = logits[j];
    for (int64_t c = 1; c < k; ++c) {
      if (logits[c * plane + j] > best_v) {
        best_v = logits[c * plane + j];
        best = c;
      }
    }
    out[j] = static_cast<uint8_t>(best);
  }
  return out;
}

std::string BlockRes::label() const {
  std::ostringstream os;
  os << time_ms << "ms x " << freq_mhz << "MHz";
  return os.str();
}

OccupancyReport forecast_occupancy_eval(const Forecaster& model,
                                        const std::vector<const SentenceTokens*>& sentences,
                                        const std::vector<BlockRes>& blocks, int steps) {
  if (sentences.empty()) throw DataError("no sentences to evaluate");
  if (blocks.empty()) throw ConfigError("no block resolutions requested");

  OccupancyReport report;
  report.blocks = blocks;
  report.steps = steps;
  report.pooled.assign(blocks.size(), {});
  report.per_step.assign(blocks.size(), std::vector<RecallCell>(static_cast<size_t>(steps)));

  for (const SentenceTokens* sp : sentences) {
    const SentenceTokens& sent = *sp;
    const int64_t t_all = sent.t_tokens();
    if (t_all <= steps) throw DataError("sentence too short for the rollout horizon");
    const int64_t t_ctx = t_all - steps;
    const int64_t f = sent.f_bins(), w = sent.width();
    const int64_t token = f * w;

    Tensor<float> context({t_ctx, f, w});
    std::copy(sent.tokens.data(), sent.tokens.data() + t_ctx * token, context.data());
    const Tensor<float> pred_tokens = rollout_forecast(model, context, steps);

    // future region images, de-standardized with the sentence's stored stats
    Tensor<float> true_img({f, static_cast<int64_t>(steps) * w});
    Tensor<float> pred_img({f, static_cast<int64_t>(steps) * w});
    for (int s = 0; s < steps; ++s) {
      for (int64_t r = 0; r < f; ++r) {
        for (int64_t c = 0; c < w; ++c) {
          const auto de = [&](float v) {
            return static_cast<float>(v * sent.stdev + sent.mean);
          };
          true_img.at(r, s * w + c) = de(sent.tokens.at(t_ctx + s, r, c));
          pred_img.at(r, s * w + c) = de(pred_tokens.at(s, r, c));
        }
      }
    }
    const double delta = occupancy_threshold(true_img);

    // pixel scales of the sentence image
    const int64_t img_w = t_all * w;
    const double s_per_px = sent.duration_ms * 1e-3 / static_cast<double>(img_w);
    const double hz_per_px = sent.band_hz / static_cast<double>(f);

    for (size_t b = 0; b < blocks.size(); ++b) {
      const auto block_cols =
          std::max<int64_t>(1, std::llround(blocks[b].time_ms * 1e-3 / s_per_px));
      const auto block_rows =
          std::max<int64_t>(1, std::llround(blocks[b].freq_mhz * 1e6 / hz_per_px));
      if (block_rows > f || block_cols > static_cast<int64_t>(steps) * w) {
        throw ConfigError("block " + blocks[b].label() + " larger than the forecast region");
      }
      const ResourceGrid truth = grid_from_pixels(true_img, block_rows, block_cols, delta);
      const ResourceGrid pred = grid_from_pixels(pred_img, block_rows, block_cols, delta);

      for (int64_t br = 0; br < truth.occupancy.dim(0); ++br) {
        for (int64_t bc = 0; bc < truth.occupancy.dim(1); ++bc) {
          if (!truth.occupancy.at(br, bc)) continue;
          const bool hit = pred.occupancy.at(br, bc) != 0;
          report.pooled[b].occupied++;
          if (hit) report.pooled[b].hits++;
          // attribute the block to the rollout step holding its time center
          const int64_t center_px = bc * block_cols + block_cols / 2;
          const auto step = std::min<int64_t>(steps - 1, center_px / w);
          report.per_step[b][static_cast<size_t>(step)].occupied++;
          if (hit) report.per_step[b][static_cast<size_t>(step)].hits++;
        }
      }
    }
  }
  return report;
}

}  // namespace speclearn
