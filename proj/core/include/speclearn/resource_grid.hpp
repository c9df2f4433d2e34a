#pragma once

#include "speclearn/spectrogram.hpp"
#include "speclearn/tensor.hpp"

namespace speclearn {

// Block-mean grid over a spectrogram plus its thresholded occupancy.
struct ResourceGrid {
  Tensor<float> means;      // (freq_blocks, time_blocks)
  Tensor<uint8_t> occupancy;  // means > delta (strict)
  double delta = 0.0;
  int64_t block_rows = 0;  // pixels per block, frequency axis
  int64_t block_cols = 0;  // pixels per block, time axis
};

// delta = mu + 0.5 * sigma over all entries (population standard deviation).
double occupancy_threshold(const Tensor<float>& values);
double occupancy_threshold(const Spectrogram& spec);

// Pixel-level tiling: trailing partial blocks are discarded.
ResourceGrid grid_from_pixels(const Tensor<float>& img, int64_t block_rows, int64_t block_cols,
                              double delta);

// Physical block sizes converted to whole pixels by rounding (min 1).
ResourceGrid to_resource_grid(const Spectrogram& spec, double block_time_ms,
                              double block_freq_mhz, double delta);

// Fraction of truly occupied blocks predicted occupied.
double occupied_recall(const ResourceGrid& pred, const ResourceGrid& truth);

}  // namespace speclearn
