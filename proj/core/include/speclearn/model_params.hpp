#pragma once

#include <array>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "speclearn/model_config.hpp"
#include "speclearn/tensor.hpp"

namespace speclearn {

// Gate order used throughout: input, forget, candidate, output.
enum Gate : int { kGateI = 0, kGateF = 1, kGateG = 2, kGateO = 3 };

template <typename T>
struct ConvLstmLayer {
  std::array<Tensor<T>, 4> w_x;   // (C, Cin, k, k)
  std::array<Tensor<T>, 4> w_h;   // (C, C, k, k)
  std::array<Tensor<T>, 4> bias;  // per-gate bias maps (C, H, W)
  std::array<Tensor<T>, 3> peep;  // Hadamard maps for i, f, o; unused if peephole off
};

template <typename T>
struct ModelParams {
  ModelConfig cfg;
  std::vector<ConvLstmLayer<T>> layers;
  Tensor<T> msm_kernel;  // (1, C, kt, kh, kw)
  Tensor<T> msm_bias;    // (1)
  Tensor<T> forecast_kernel;
  Tensor<T> forecast_bias;
  Tensor<T> seg_w1;  // (seg_hidden, C, k, k)
  Tensor<T> seg_b1;  // (seg_hidden)
  Tensor<T> seg_w2;  // (seg_classes, seg_hidden, k, k)
  Tensor<T> seg_b2;  // (seg_classes)
  std::set<std::string> frozen;

  // Allocates all tensors at their configured shapes, zero-filled.
  static ModelParams shaped(const ModelConfig& cfg);

  // Visits every parameter in a fixed order (checkpoint and optimizer order).
  void for_each(const std::function<void(const std::string&, Tensor<T>&)>& fn);
  void for_each(const std::function<void(const std::string&, const Tensor<T>&)>& fn) const;

  bool trainable(const std::string& name) const { return frozen.find(name) == frozen.end(); }

  int64_t parameter_count() const;

  template <typename U>
  ModelParams<U> cast() const {
    ModelParams<U> out = ModelParams<U>::shaped(cfg);
    out.frozen = frozen;
    auto src = const_cast<ModelParams*>(this);
    std::vector<const Tensor<T>*> flat;
    src->for_each([&](const std::string&, Tensor<T>& t) { flat.push_back(&t); });
    size_t i = 0;
    out.for_each([&](const std::string&, Tensor<U>& t) { t = flat[i++]->template cast<U>(); });
    return out;
  }
};

// Fan-in-scaled uniform init for kernels; biases zero except the forget-gate
// bias map, which starts at one; peephole maps start at zero.
template <typename T>
ModelParams<T> init_weights(const ModelConfig& cfg, uint64_t seed);

// Marks the ConvLSTM stack non-trainable; heads stay trainable.
template <typename T>
void freeze_backbone(ModelParams<T>& params);

extern template struct ModelParams<float>;
extern template struct ModelParams<double>;
extern template ModelParams<float> init_weights<float>(const ModelConfig&, uint64_t);
extern template ModelParams<double> init_weights<double>(const ModelConfig&, uint64_t);
extern template void freeze_backbone<float>(ModelParams<float>&);
extern template void freeze_backbone<double>(ModelParams<double>&);

}  // namespace speclearn
