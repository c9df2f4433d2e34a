#pragma once

#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "speclearn/checkpoint.hpp"
#include "speclearn/masking.hpp"
#include "speclearn/model.hpp"
#include "speclearn/segdata.hpp"
#include "speclearn/sentence.hpp"

namespace speclearn {

enum class Task { Msm, Forecast, Segment };

struct TrainConfig {
  Task task = Task::Msm;
  double mask_ratio = 0.2;
  int batch_size = 8;
  int epochs = 20;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  uint64_t seed = 0;
  int jobs = 1;
  bool reproducible = true;

  void validate() const;
};

// Append-only `step=<k> loss=<v> lr=<v> wallclock_s=<v>` lines plus a
// structured metrics mirror per run (loss curve and, for masked
// pretraining, the per-masked-element mean; no wallclock).
class TrainLogger {
 public:
  TrainLogger() = default;
  TrainLogger(const std::filesystem::path& run_dir, const std::string& name);
  void log_step(int64_t step, double loss, double lr,
                double per_element = std::numeric_limits<double>::quiet_NaN());
  void finish();

  const std::vector<std::pair<int64_t, double>>& curve() const { return curve_; }

 private:
  std::ofstream log_;
  std::filesystem::path metrics_path_;
  std::string name_;
  std::vector<std::pair<int64_t, double>> curve_;
  std::vector<double> per_element_;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Training data handle: a sentence corpus (MSM / forecasting) or a
// segmentation dataset, optionally restricted to an index subset.
struct TaskData {
  const Corpus* corpus = nullptr;
  const SegDataset* seg = nullptr;
  std::vector<int64_t> indices;  // empty = all items

  uint64_t preprocessing_digest() const;
  int64_t size() const;
};

// Masked-reconstruction pretraining over every parameter.
Checkpoint pretrain(const ModelParams<float>& init, const Corpus& corpus, const TrainConfig& cfg,
                    TrainLogger* logger = nullptr);

// Frozen-backbone head fine-tuning. The data's preprocessing digest must
// match the checkpoint's. Forecast fine-tuning starts the forecast head from
// the pretrained reconstruction head weights.
Checkpoint finetune(const Checkpoint& ckpt, const TaskData& data, const TrainConfig& cfg,
                    TrainLogger* logger = nullptr);

// Same-architecture comparator trained from scratch on the task data.
Checkpoint train_from_scratch(const ModelConfig& model_cfg, const TaskData& data,
                              const TrainConfig& cfg, TrainLogger* logger = nullptr);

// Per-masked-element reconstruction MSE of the model over a sentence set,
// with masks drawn deterministically from `seed`.
double msm_masked_mse(const ModelParams<float>& params,
                      const std::vector<const SentenceTokens*>& sentences, double mask_ratio,
                      uint64_t seed);

// Same protocol, but the prediction is each sentence's own mean value.
double msm_mean_baseline_mse(const std::vector<const SentenceTokens*>& sentences,
                             double mask_ratio, uint64_t seed);

// Deterministic train/test sentence split at recording granularity.
std::pair<std::vector<int64_t>, std::vector<int64_t>> split_sentences_by_recording(
    const Corpus& corpus, double train_fraction, uint64_t seed);

// (T, F, W) tokens as model input (T, 1, F, W).
Tensor<float> tokens_to_input(const Tensor<float>& tokens);

// Standardize a raw image and tokenize it (the dataset PREPROCESS step).
SentenceTokens sentence_from_image(const Tensor<float>& image, int64_t n_tokens);

}  // namespace speclearn
