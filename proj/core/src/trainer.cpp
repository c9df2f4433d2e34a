#include "speclearn/trainer.hpp"

#include <chrono>
#include <cmath>
#include <mutex>

#include <nlohmann/json.hpp>

#include "speclearn/confusion.hpp"
#include "speclearn/errors.hpp"
#include "speclearn/losses.hpp"
#include "speclearn/optimizer.hpp"
#include "speclearn/parallel.hpp"

namespace speclearn {

using nlohmann::json;

void TrainConfig::validate() const {
  if (!(mask_ratio > 0.0 && mask_ratio <= 1.0)) throw ConfigError("mask_ratio must be in (0, 1]");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (lr <= 0.0) throw ConfigError("learning rate must be positive");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
}

TrainLogger::TrainLogger(const std::filesystem::path& run_dir, const std::string& name)
    : name_(name) {
  std::filesystem::create_directories(run_dir);
  log_.open(run_dir / (name + ".log"), std::ios::app);
  metrics_path_ = run_dir / ("metrics_" + name + ".json");
}

void TrainLogger::log_step(int64_t step, double loss, double lr, double per_element) {
  curve_.emplace_back(step, loss);
  per_element_.push_back(per_element);
  if (log_.is_open()) {
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    log_ << "step=" << step << " loss=" << loss << " lr=" << lr << " wallclock_s=" << wall
         << "\n";
    log_.flush();
  }
}

void TrainLogger::finish() {
  if (metrics_path_.empty()) return;
  json steps = json::array();
  for (size_t i = 0; i < curve_.size(); ++i) {
    json entry{{"step", curve_[i].first}, {"loss", curve_[i].second}};
    if (std::isfinite(per_element_[i])) entry["loss_per_masked_element"] = per_element_[i];
    steps.push_back(std::move(entry));
  }
  json out{{"name", name_}, {"steps", steps}};
  std::ofstream f(metrics_path_);
  f << out.dump(2) << "\n";
}

uint64_t TaskData::preprocessing_digest() const {
  if (corpus) return corpus->meta.digest;
  if (seg) return seg->preprocessing_digest;
  throw ConfigError("empty task data");
}

int64_t TaskData::size() const {
  if (!indices.empty()) return static_cast<int64_t>(indices.size());
  if (corpus) return static_cast<int64_t>(corpus->sentences.size());
  if (seg) return static_cast<int64_t>(seg->specs.size());
  return 0;
}

Tensor<float> tokens_to_input(const Tensor<float>& tokens) {
  Tensor<float> x({tokens.dim(0), 1, tokens.dim(1), tokens.dim(2)});
  std::copy(tokens.data(), tokens.data() + tokens.size(), x.data());
  return x;
}

SentenceTokens sentence_from_image(const Tensor<float>& image, int64_t n_tokens) {
  double mean = 0.0;
  for (int64_t i = 0; i < image.size(); ++i) mean += image[i];
  mean /= static_cast<double>(image.size());
  double var = 0.0;
  for (int64_t i = 0; i < image.size(); ++i) {
    const double d = image[i] - mean;
    var += d * d;
  }
  double sd = std::sqrt(var / static_cast<double>(image.size()));
  if (sd < 1e-12) sd = 1.0;
  Tensor<float> norm(image.shape());
  for (int64_t i = 0; i < image.size(); ++i) {
    norm[i] = static_cast<float>((image[i] - mean) / sd);
  }
  SentenceTokens s;
  s.tokens = tokenize_image(norm, n_tokens);
  s.mean = mean;
  s.stdev = sd;
  return s;
}

namespace {

int64_t resolve_index(const TaskData& data, int64_t i) {
  return data.indices.empty() ? i : data.indices[static_cast<size_t>(i)];
}

void zero_trainable(ModelParams<float>& grads) {
  grads.for_each([&](const std::string& name, Tensor<float>& t) {
    if (grads.trainable(name)) t.fill(0.0f);
  });
}

void add_trainable(ModelParams<float>& dst, const ModelParams<float>& src) {
  std::vector<const Tensor<float>*> flat;
  src.for_each([&](const std::string&, const Tensor<float>& t) { flat.push_back(&t); });
  size_t i = 0;
  dst.for_each([&](const std::string& name, Tensor<float>& t) {
    const Tensor<float>& s = *flat[i++];
    if (!dst.trainable(name)) return;
    for (int64_t j = 0; j < t.size(); ++j) t[j] += s[j];
  });
}

void shuffle_indices(std::vector<int64_t>& v, Rng& rng) {
  for (int64_t i = static_cast<int64_t>(v.size()) - 1; i > 0; --i) {
    std::swap(v[static_cast<size_t>(i)], v[static_cast<size_t>(rng.uniform_int(i + 1))]);
  }
}

struct SampleOutcome {
  double loss = 0.0;
  int64_t masked_elems = 0;
};

// One sample's forward (and backward when grads != nullptr) for every task.
class TaskRunner {
 public:
  TaskRunner(Task task, const ModelParams<float>& params, const TaskData& data,
             const TrainConfig& cfg, bool backbone_trainable)
      : task_(task), params_(params), data_(data), cfg_(cfg),
        backbone_trainable_(backbone_trainable) {}

  void set_stack(const ConvLstmStack<float>* stack) { stack_ = stack; }
  void set_feature_cache(const std::vector<Tensor<float>>* cache) { feat_cache_ = cache; }

  // `pos` is the position within data (0..size), `epoch` drives the mask rng.
  SampleOutcome run(int64_t pos, int64_t epoch, ModelParams<float>* grads) const {
    const int64_t idx = resolve_index(data_, pos);
    switch (task_) {
      case Task::Msm:
        return run_msm(idx, epoch, grads);
      case Task::Forecast:
        return run_forecast(idx, pos, grads);
      case Task::Segment:
        return run_segment(idx, pos, grads);
    }
    throw ConfigError("unknown task");
  }

 private:
  SampleOutcome run_msm(int64_t idx, int64_t epoch, ModelParams<float>* grads) const {
    const SentenceTokens& sent = data_.corpus->sentences[static_cast<size_t>(idx)];
    const int64_t total = static_cast<int64_t>(data_.corpus->sentences.size());
    Rng mask_rng = Rng(cfg_.seed).fork(21).fork(static_cast<uint64_t>(epoch * total + idx));
    const MaskedSentence ms = random_mask(sent, cfg_.mask_ratio, mask_rng);

    const Tensor<float> x = tokens_to_input(ms.sentence.tokens);
    StackCache<float> cache;
    const Tensor<float> feats = stack_->forward(x, grads ? &cache : nullptr);
    const Tensor<float> out = conv3d_head_forward(feats, params_.msm_kernel, params_.msm_bias);

    const int64_t t_len = sent.t_tokens(), f = sent.f_bins(), w = sent.width();
    Tensor<float> pred({1, t_len, f, w});
    std::copy(out.data(), out.data() + out.size(), pred.data());
    Tensor<float> target({1, t_len, f, w});
    std::copy(sent.tokens.data(), sent.tokens.data() + sent.tokens.size(), target.data());

    Tensor<float> d_pred;
    if (grads) d_pred = Tensor<float>({1, t_len, f, w});
    SampleOutcome res;
    res.loss = msm_loss(pred, target, {ms.mask}, grads ? &d_pred : nullptr);
    for (const auto m : ms.mask) {
      if (m) res.masked_elems += f * w;
    }

    if (grads) {
      Tensor<float> d_out({t_len, 1, f, w});
      std::copy(d_pred.data(), d_pred.data() + d_pred.size(), d_out.data());
      Tensor<float> d_feats(feats.shape());
      conv3d_head_backward(feats, params_.msm_kernel, d_out, &d_feats, &grads->msm_kernel,
                           &grads->msm_bias);
      stack_->backward(cache, d_feats, *grads);
    }
    return res;
  }

  SampleOutcome run_forecast(int64_t idx, int64_t pos, ModelParams<float>* grads) const {
    const SentenceTokens& sent = data_.corpus->sentences[static_cast<size_t>(idx)];
    const int64_t t_all = sent.t_tokens();
    if (t_all < 2) throw DataError("forecasting needs at least 2 tokens per sentence");
    const int64_t t_ctx = t_all - 1;
    const int64_t f = sent.f_bins(), w = sent.width();
    const int64_t token = f * w;

    Tensor<float> feats_local;
    const Tensor<float>* feats = nullptr;
    StackCache<float> cache;
    if (feat_cache_) {
      feats = &(*feat_cache_)[static_cast<size_t>(pos)];
    } else {
      Tensor<float> x({t_ctx, 1, f, w});
      std::copy(sent.tokens.data(), sent.tokens.data() + t_ctx * token, x.data());
      feats_local = stack_->forward(x, grads && backbone_trainable_ ? &cache : nullptr);
      feats = &feats_local;
    }

    const Tensor<float> out =
        conv3d_head_forward(*feats, params_.forecast_kernel, params_.forecast_bias);
    Tensor<float> pred({1, f, w});
    std::copy(out.data(), out.data() + token, pred.data());
    Tensor<float> target({1, f, w});
    std::copy(sent.tokens.data() + t_ctx * token, sent.tokens.data() + t_all * token,
              target.data());

    Tensor<float> d_pred;
    if (grads) d_pred = Tensor<float>({1, f, w});
    SampleOutcome res;
    res.loss = forecast_loss(pred, target, grads ? &d_pred : nullptr);

    if (grads) {
      Tensor<float> d_out({t_ctx, 1, f, w});
      std::copy(d_pred.data(), d_pred.data() + token, d_out.data());  // initial token only
      Tensor<float> d_feats;
      if (backbone_trainable_) d_feats = Tensor<float>(feats->shape());
      conv3d_head_backward(*feats, params_.forecast_kernel, d_out,
                           backbone_trainable_ ? &d_feats : nullptr, &grads->forecast_kernel,
                           &grads->forecast_bias);
      if (backbone_trainable_) stack_->backward(cache, d_feats, *grads);
    }
    return res;
  }

  SampleOutcome run_segment(int64_t idx, int64_t pos, ModelParams<float>* grads) const {
    const LabelImage& labels = data_.seg->labels[static_cast<size_t>(idx)];

    Tensor<float> feats_local;
    const Tensor<float>* feats = nullptr;
    StackCache<float> cache;
    if (feat_cache_) {
      feats = &(*feat_cache_)[static_cast<size_t>(pos)];
    } else {
      const SentenceTokens s = sentence_from_image(data_.seg->specs[static_cast<size_t>(idx)],
                                                   params_.cfg.tokens_per_sentence);
      const Tensor<float> x = tokens_to_input(s.tokens);
      feats_local = stack_->forward(x, grads && backbone_trainable_ ? &cache : nullptr);
      feats = &feats_local;
    }

    SegHeadCache<float> head_cache;
    const Tensor<float> logits =
        seg_head_logits(*feats, params_, grads ? &head_cache : nullptr);
    Tensor<float> d_logits;
    if (grads) d_logits = Tensor<float>(logits.shape());
    SampleOutcome res;
    res.loss = softmax_ce_loss(logits, labels, grads ? &d_logits : nullptr);

    if (grads) {
      Tensor<float> d_feats;
      if (backbone_trainable_) d_feats = Tensor<float>(feats->shape());
      seg_head_backward(head_cache, params_, d_logits,
                        backbone_trainable_ ? &d_feats : nullptr, *grads);
      if (backbone_trainable_) stack_->backward(cache, d_feats, *grads);
    }
    return res;
  }

  Task task_;
  const ModelParams<float>& params_;
  const TaskData& data_;
  const TrainConfig& cfg_;
  bool backbone_trainable_;
  const ConvLstmStack<float>* stack_ = nullptr;
  const std::vector<Tensor<float>>* feat_cache_ = nullptr;
};

// Frozen-backbone feature precomputation; falls back to per-epoch
// recomputation when the cache would be too large.
constexpr int64_t kFeatureCacheBudgetBytes = int64_t{15} * 100 * 1000 * 1000;  // 1.5 GB

std::optional<std::vector<Tensor<float>>> try_cache_features(Task task,
                                                             const ModelParams<float>& params,
                                                             const TaskData& data, int jobs) {
  const int64_t n = data.size();
  if (n == 0) return std::nullopt;
  const auto& cfg = params.cfg;
  const int64_t t_feat =
      task == Task::Forecast ? cfg.tokens_per_sentence - 1 : cfg.tokens_per_sentence;
  const int64_t bytes_per =
      t_feat * cfg.channels * cfg.token_height * cfg.token_width * static_cast<int64_t>(4);
  if (bytes_per * n > kFeatureCacheBudgetBytes) return std::nullopt;

  const ConvLstmStack<float> stack(params);
  std::vector<Tensor<float>> cache(static_cast<size_t>(n));
  parallel_for(n, jobs, [&](int64_t pos) {
    const int64_t idx = resolve_index(data, pos);
    Tensor<float> x;
    if (task == Task::Forecast) {
      const SentenceTokens& sent = data.corpus->sentences[static_cast<size_t>(idx)];
      const int64_t token = sent.f_bins() * sent.width();
      x = Tensor<float>({sent.t_tokens() - 1, 1, sent.f_bins(), sent.width()});
      std::copy(sent.tokens.data(), sent.tokens.data() + (sent.t_tokens() - 1) * token, x.data());
    } else {
      const SentenceTokens s = sentence_from_image(data.seg->specs[static_cast<size_t>(idx)],
                                                   cfg.tokens_per_sentence);
      x = tokens_to_input(s.tokens);
    }
    cache[static_cast<size_t>(pos)] = stack.forward(x, nullptr);
  });
  return cache;
}

// The shared epoch/batch engine. Updates `params` in place.
void run_training(Task task, ModelParams<float>& params, const TaskData& data,
                  const TrainConfig& cfg, TrainLogger* logger) {
  cfg.validate();
  const int64_t n = data.size();
  if (n == 0) throw DataError("no training examples");

  bool backbone_trainable = false;
  params.for_each([&](const std::string& name, Tensor<float>&) {
    if (name.rfind("backbone.", 0) == 0 && params.trainable(name)) backbone_trainable = true;
  });

  TaskRunner runner(task, params, data, cfg, backbone_trainable);

  std::optional<std::vector<Tensor<float>>> feat_cache;
  if (!backbone_trainable && task != Task::Msm) {
    feat_cache = try_cache_features(task, params, data, cfg.jobs);
    if (feat_cache) runner.set_feature_cache(&*feat_cache);
  }

  AdamOptimizer<float> opt({cfg.lr, cfg.beta1, cfg.beta2, cfg.eps});

  const int64_t batch = std::min<int64_t>(cfg.batch_size, n);
  std::vector<ModelParams<float>> sample_grads;
  if (cfg.reproducible) {
    sample_grads.reserve(static_cast<size_t>(batch));
    for (int64_t i = 0; i < batch; ++i) {
      sample_grads.push_back(ModelParams<float>::shaped(params.cfg));
      sample_grads.back().frozen = params.frozen;
    }
  }
  ModelParams<float> total_grads = ModelParams<float>::shaped(params.cfg);
  total_grads.frozen = params.frozen;

  std::vector<int64_t> positions(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) positions[static_cast<size_t>(i)] = i;

  Rng shuffle_root = Rng(cfg.seed).fork(22);
  int64_t step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng ep_rng = shuffle_root.fork(static_cast<uint64_t>(epoch));
    shuffle_indices(positions, ep_rng);

    for (int64_t base = 0; base < n; base += batch) {
      const int64_t b = std::min<int64_t>(batch, n - base);
      std::optional<ConvLstmStack<float>> stack;  // repacked after each update
      if (!feat_cache) {
        stack.emplace(params);
        runner.set_stack(&*stack);
      }

      std::vector<double> losses(static_cast<size_t>(b), 0.0);
      std::vector<int64_t> masked(static_cast<size_t>(b), 0);
      zero_trainable(total_grads);

      if (cfg.reproducible) {
        parallel_for(b, cfg.jobs, [&](int64_t i) {
          zero_trainable(sample_grads[static_cast<size_t>(i)]);
          const SampleOutcome res =
              runner.run(positions[static_cast<size_t>(base + i)], epoch,
                         &sample_grads[static_cast<size_t>(i)]);
          losses[static_cast<size_t>(i)] = res.loss;
          masked[static_cast<size_t>(i)] = res.masked_elems;
        });
        for (int64_t i = 0; i < b; ++i) {
          add_trainable(total_grads, sample_grads[static_cast<size_t>(i)]);
        }
      } else {
        std::mutex mu;
        parallel_for(b, cfg.jobs, [&](int64_t i) {
          ModelParams<float> g = ModelParams<float>::shaped(params.cfg);
          g.frozen = params.frozen;
          const SampleOutcome res =
              runner.run(positions[static_cast<size_t>(base + i)], epoch, &g);
          losses[static_cast<size_t>(i)] = res.loss;
          masked[static_cast<size_t>(i)] = res.masked_elems;
          const std::lock_guard<std::mutex> lock(mu);
          add_trainable(total_grads, g);
        });
      }

      double loss = 0.0;
      int64_t masked_total = 0;
      for (int64_t i = 0; i < b; ++i) {
        loss += losses[static_cast<size_t>(i)];
        masked_total += masked[static_cast<size_t>(i)];
      }
      if (!std::isfinite(loss)) {
        throw DataError("training diverged (non-finite loss) at step " + std::to_string(step) +
                        ", epoch " + std::to_string(epoch));
      }

      opt.step(params, total_grads);
      ++step;
      if (logger) {
        const double per_element = task == Task::Msm && masked_total > 0
                                       ? loss / static_cast<double>(masked_total)
                                       : std::numeric_limits<double>::quiet_NaN();
        logger->log_step(step, loss, cfg.lr, per_element);
      }
    }
  }
  if (logger) logger->finish();
}

}  // namespace

Checkpoint pretrain(const ModelParams<float>& init, const Corpus& corpus, const TrainConfig& cfg,
                    TrainLogger* logger) {
  if (cfg.task != Task::Msm) throw ConfigError("pretraining runs the MSM task");
  if (corpus.sentences.empty()) throw DataError("empty corpus");

  Checkpoint out;
  out.params = init;
  out.params.frozen.clear();
  out.preprocessing_digest = corpus.meta.digest;

  TaskData data;
  data.corpus = &corpus;
  run_training(Task::Msm, out.params, data, cfg, logger);
  return out;
}

Checkpoint finetune(const Checkpoint& ckpt, const TaskData& data, const TrainConfig& cfg,
                    TrainLogger* logger) {
  if (cfg.task == Task::Msm) throw ConfigError("fine-tuning expects a downstream task");
  if (cfg.task == Task::Forecast && !data.corpus) {
    throw ConfigError("forecast fine-tuning needs a sentence corpus");
  }
  if (cfg.task == Task::Segment && !data.seg) {
    throw ConfigError("segmentation fine-tuning needs a segmentation dataset");
  }
  if (data.preprocessing_digest() != ckpt.preprocessing_digest) {
    throw CompatError("preprocessing digest mismatch between checkpoint and dataset");
  }

  Checkpoint out;
  out.preprocessing_digest = ckpt.preprocessing_digest;
  out.params = ckpt.params;
  freeze_backbone(out.params);
  if (cfg.task == Task::Forecast) {
    // the forecast head starts from the pretrained reconstruction head
    out.params.forecast_kernel = out.params.msm_kernel;
    out.params.forecast_bias = out.params.msm_bias;
  }
  run_training(cfg.task, out.params, data, cfg, logger);
  return out;
}

Checkpoint train_from_scratch(const ModelConfig& model_cfg, const TaskData& data,
                              const TrainConfig& cfg, TrainLogger* logger) {
  if (cfg.task == Task::Msm) throw ConfigError("use pretrain() for the MSM task");
  Checkpoint out;
  out.preprocessing_digest = data.preprocessing_digest();
  out.params = init_weights<float>(model_cfg, cfg.seed);
  run_training(cfg.task, out.params, data, cfg, logger);
  return out;
}

double msm_masked_mse(const ModelParams<float>& params,
                      const std::vector<const SentenceTokens*>& sentences, double mask_ratio,
                      uint64_t seed) {
  if (sentences.empty()) throw DataError("no sentences to evaluate");
  const ConvLstmStack<float> stack(params);
  double sq = 0.0;
  int64_t count = 0;
  for (size_t s = 0; s < sentences.size(); ++s) {
    const SentenceTokens& sent = *sentences[s];
    Rng rng = Rng(seed).fork(s);
    const MaskedSentence ms = random_mask(sent, mask_ratio, rng);
    const Tensor<float> x = tokens_to_input(ms.sentence.tokens);
    const Tensor<float> feats = stack.forward(x, nullptr);
    const Tensor<float> pred = conv3d_head_forward(feats, params.msm_kernel, params.msm_bias);
    const int64_t token = sent.f_bins() * sent.width();
    for (int64_t t = 0; t < sent.t_tokens(); ++t) {
      if (!ms.mask[static_cast<size_t>(t)]) continue;
      const float* p = pred.data() + t * token;
      const float* q = sent.tokens.data() + t * token;
      for (int64_t j = 0; j < token; ++j) {
        const double d = static_cast<double>(p[j]) - static_cast<double>(q[j]);
        sq += d * d;
      }
      count += token;
    }
  }
  return sq / static_cast<double>(count);
}

double msm_mean_baseline_mse(const std::vector<const SentenceTokens*>& sentences,
                             double mask_ratio, uint64_t seed) {
  if (sentences.empty()) throw DataError("no sentences to evaluate");
  double sq = 0.0;
  int64_t count = 0;
  for (size_t s = 0; s < sentences.size(); ++s) {
    const SentenceTokens& sent = *sentences[s];
    Rng rng = Rng(seed).fork(s);
    const MaskedSentence ms = random_mask(sent, mask_ratio, rng);
    double mean = 0.0;
    for (int64_t i = 0; i < sent.tokens.size(); ++i) mean += sent.tokens[i];
    mean /= static_cast<double>(sent.tokens.size());
    const int64_t token = sent.f_bins() * sent.width();
    for (int64_t t = 0; t < sent.t_tokens(); ++t) {
      if (!ms.mask[static_cast<size_t>(t)]) continue;
      const float* q = sent.tokens.data() + t * token;
      for (int64_t j = 0; j < token; ++j) {
        const double d = mean - static_cast<double>(q[j]);
        sq += d * d;
      }
      count += token;
    }
  }
  return sq / static_cast<double>(count);
}

std::pair<std::vector<int64_t>, std::vector<int64_t>> split_sentences_by_recording(
    const Corpus& corpus, double train_fraction, uint64_t seed) {
  std::vector<std::string> rec_order;
  std::map<std::string, std::vector<int64_t>> groups;
  for (size_t i = 0; i < corpus.sentences.size(); ++i) {
    const std::string& src = corpus.sentences[i].source_id;
    if (groups.find(src) == groups.end()) rec_order.push_back(src);
    groups[src].push_back(static_cast<int64_t>(i));
  }

  const auto parts = split_indices(static_cast<int64_t>(rec_order.size()),
                                   {train_fraction, 1.0 - train_fraction}, seed);
  std::pair<std::vector<int64_t>, std::vector<int64_t>> out;
  for (const int64_t g : parts[0]) {
    const auto& v = groups[rec_order[static_cast<size_t>(g)]];
    out.first.insert(out.first.end(), v.begin(), v.end());
  }
  for (const int64_t g : parts[1]) {
    const auto& v = groups[rec_order[static_cast<size_t>(g)]];
    out.second.insert(out.second.end(), v.begin(), v.end());
  }
  return out;
}

}  // namespace speclearn
