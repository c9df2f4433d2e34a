#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "speclearn/mixture.hpp"
#include "speclearn/spectrogram.hpp"
#include "speclearn/tensor.hpp"
#include "speclearn/waveform.hpp"

namespace speclearn {

// Pixel classes: 0 noise, 1 NR-like, 2 LTE-like.
using LabelImage = Tensor<uint8_t>;

struct SegSignalMeta {
  uint8_t label = 0;
  double offset_hz = 0.0;
  double occupied_bw_hz = 0.0;
  double nominal_bw_hz = 0.0;
  double scs_hz = 0.0;
  std::vector<TimeInterval> bursts;
};

struct SegExample {
  Spectrogram spec;   // resized log-power image with axis metadata
  LabelImage labels;  // same shape as spec.values
  double noise_dbm = 0.0;
  std::vector<SegSignalMeta> signals;
};

struct SegGenConfig {
  Split split = Split::Train;
  double band_sample_rate_hz = 61.44e6;
  double band_center_freq_hz = 4e9;
  int n_subframes = 40;
  double burst_duty = 0.7;
  int64_t image_size = 256;
  SpectroParams spectro;
  double signal_total_dbm = -40.0;  // mixture power before the noise draw
  double doppler_hz = 30.0;

  void validate() const;
};

// One NR-like + LTE-like mixture in disjoint sub-bands, faded, scaled to the
// configured total power, noise added per the split's distribution, then
// rendered to a (image_size, image_size) spectrogram and per-pixel labels.
// A pixel is labeled when at least half of its time-frequency cell overlaps
// the signal's active footprint.
SegExample make_segmentation_example(const SegGenConfig& cfg, Rng& rng);

// Rasterize signal footprints onto the pixel grid of `spec`.
LabelImage rasterize_labels(const Spectrogram& spec, const std::vector<SegSignalMeta>& signals);

void write_seg_dataset(const std::filesystem::path& dir, const SegGenConfig& cfg,
                       const std::vector<SegExample>& examples, uint64_t seed);

struct SegDataset {
  Split split = Split::Train;
  uint64_t seed = 0;
  uint64_t preprocessing_digest = 0;
  int64_t image_size = 256;
  SpectroParams spectro;
  std::vector<Tensor<float>> specs;
  std::vector<LabelImage> labels;
  std::vector<double> noise_dbm;

  static SegDataset load(const std::filesystem::path& dir);
};

}  // namespace speclearn
