#include "speclearn/resource_grid.hpp"

#include <cmath>

#include "speclearn/errors.hpp"

namespace speclearn {

double occupancy_threshold(const Tensor<float>& values) {
  if (values.size() == 0) throw DataError("empty spectrogram");
  double mean = 0.0;
  for (int64_t i = 0; i < values.size(); ++i) mean += values[i];
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (int64_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - mean;
    var += d * d;
  }
  var /= static_cast<double>(values.size());
  return mean + 0.5 * std::sqrt(var);
}

double occupancy_threshold(const Spectrogram& spec) { return occupancy_threshold(spec.values); }

ResourceGrid grid_from_pixels(const Tensor<float>& img, int64_t block_rows, int64_t block_cols,
                              double delta) {
  if (img.rank() != 2) throw DimensionError("resource grid needs a 2-D image");
  if (block_rows < 1 || block_cols < 1) throw ConfigError("block size must be >= 1 pixel");
  const int64_t h = img.dim(0), w = img.dim(1);
  if (block_rows > h || block_cols > w) throw ConfigError("block larger than the spectrogram span");
  const int64_t gr = h / block_rows;
  const int64_t gc = w / block_cols;

  ResourceGrid grid;
  grid.delta = delta;
  grid.block_rows = block_rows;
  grid.block_cols = block_cols;
  grid.means = Tensor<float>({gr, gc});
  grid.occupancy = Tensor<uint8_t>({gr, gc});
  for (int64_t br = 0; br < gr; ++br) {
    for (int64_t bc = 0; bc < gc; ++bc) {
      double acc = 0.0;
      for (int64_t r = br * block_rows; r < (br + 1) * block_rows; ++r) {
        for (int64_t c = bc * block_cols; c < (bc + 1) * block_cols; ++c) {
          acc += img.at(r, c);
        }
      }
      const double mean = acc / static_cast<double>(block_rows * block_cols);
      grid.means.at(br, bc) = static_cast<float>(mean);
      grid.occupancy.at(br, bc) = mean > delta ? 1 : 0;
    }
  }
  return grid;
}

ResourceGrid to_resource_grid(const Spectrogram& spec, double block_time_ms,
                              double block_freq_mhz, double delta) {
  if (spec.s_per_frame <= 0.0 || spec.hz_per_bin <= 0.0) {
    throw ConfigError("spectrogram lacks axis metadata");
  }
  const auto block_cols =
      std::max<int64_t>(1, std::llround(block_time_ms * 1e-3 / spec.s_per_frame));
  const auto block_rows =
      std::max<int64_t>(1, std::llround(block_freq_mhz * 1e6 / spec.hz_per_bin));
  return grid_from_pixels(spec.values, block_rows, block_cols, delta);
}

double occupied_recall(const ResourceGrid& pred, const ResourceGrid& truth) {
  if (!pred.occupancy.same_shape(truth.occupancy)) {
    throw DimensionError("grids differ in shape");
  }
  int64_t occupied = 0, hit = 0;
  for (int64_t i = 0; i < truth.occupancy.size(); ++i) {
    if (truth.occupancy[i]) {
      ++occupied;
      if (pred.occupancy[i]) ++hit;
    }
  }
  if (occupied == 0) throw DataError("occupied recall undefined: no occupied block in truth");
  return static_cast<double>(hit) / static_cast<double>(occupied);
}

}  // namespace speclearn
