#pragma once

#include <cstdint>

#include "speclearn/errors.hpp"

namespace speclearn {

// Backbone and head geometry. Defaults are the full-scale model; tests and
// scaled experiments shrink channels and token size through this config.
struct ModelConfig {
  int layers = 5;
  int channels = 64;  // hidden channels per ConvLSTM layer
  int kernel = 3;
  bool peephole = true;
  int input_channels = 1;
  int64_t token_height = 256;
  int64_t token_width = 16;
  int64_t tokens_per_sentence = 16;
  int seg_classes = 3;
  int seg_hidden = 32;

  bool operator==(const ModelConfig&) const = default;

  void validate() const {
    if (layers < 1 || channels < 1) throw ConfigError("model needs >=1 layer and channel");
    if (kernel < 1 || kernel % 2 == 0) throw ConfigError("kernel must be odd");
    if (token_height < 1 || token_width < 1) throw ConfigError("token shape must be positive");
    if (tokens_per_sentence < 1) throw ConfigError("tokens_per_sentence must be >= 1");
    if (seg_classes < 2 || seg_hidden < 1) throw ConfigError("bad segmentation head widths");
  }
};

}  // namespace speclearn
