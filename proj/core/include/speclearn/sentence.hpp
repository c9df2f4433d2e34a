#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "speclearn/rng.hpp"
#include "speclearn/spectrogram.hpp"
#include "speclearn/tensor.hpp"

namespace speclearn {

// A standardized spectrogram image split along time into equal-width tokens.
// Concatenating the tokens along width reconstructs the image exactly.
struct SentenceTokens {
  Tensor<float> tokens;  // (T, F, W)
  double mean = 0.0;     // standardization stats of the source image
  double stdev = 1.0;
  std::string source_id;
  double duration_ms = 20.0;
  double band_hz = 0.0;  // frequency span covered by the image

  int64_t t_tokens() const { return tokens.dim(0); }
  int64_t f_bins() const { return tokens.dim(1); }
  int64_t width() const { return tokens.dim(2); }
};

struct SentenceConfig {
  int64_t image_size = 256;  // square sentence image
  int64_t tokens = 16;

  void validate() const;
  int64_t token_width() const { return image_size / tokens; }
};

// (F, T*W) image -> (T, F, W) tokens and back. Exact partitions, no overlap.
Tensor<float> tokenize_image(const Tensor<float>& image, int64_t t_tokens);
Tensor<float> detokenize(const Tensor<float>& tokens);

// Picks a random consecutive run of 2 ms slices covering duration_ms,
// concatenates along time, resizes to the square sentence image,
// standardizes to zero mean / unit std, and splits into tokens.
SentenceTokens build_sentence(const std::vector<Spectrogram>& slices, double duration_ms,
                              const SentenceConfig& cfg, Rng& rng,
                              const std::string& source_id = "", double slice_ms = 2.0);

struct CorpusConfig {
  SpectroParams spectro;
  SentenceConfig sentence;
  int64_t n_sentences = 0;
  uint64_t seed = 0;
  double slice_ms = 2.0;
};

// Identity of the token preprocessing chain; checkpoints refuse datasets
// prepared with a different one.
uint64_t preprocessing_digest(const SpectroParams& sp, const SentenceConfig& sc);

struct CorpusMeta {
  SpectroParams spectro;
  SentenceConfig sentence;
  uint64_t seed = 0;
  uint64_t digest = 0;
  double slice_ms = 2.0;
  int64_t n_sentences = 0;
};

struct Corpus {
  CorpusMeta meta;
  std::vector<SentenceTokens> sentences;

  static Corpus load(const std::filesystem::path& dir);
};

// Writes sent_<k>.tok / sent_<k>.stats files plus the manifest (last, so a
// failed build leaves no manifest behind).
void build_corpus(const std::vector<std::pair<std::string, IQRecording>>& recordings,
                  const CorpusConfig& cfg, const std::filesystem::path& dir);

}  // namespace speclearn
