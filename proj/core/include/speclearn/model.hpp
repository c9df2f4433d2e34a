#pragma once

#include <memory>
#include <vector>

#include "speclearn/model_params.hpp"

namespace speclearn {

template <typename T>
struct LayerState {
  Tensor<T> h;  // (C, H, W)
  Tensor<T> c;

  static LayerState zeros(int64_t channels, int64_t height, int64_t width) {
    return {Tensor<T>({channels, height, width}), Tensor<T>({channels, height, width})};
  }
};

// One recurrent cell step. Gate pre-activations are gate convolutions of the
// input and previous hidden state plus the bias map, with optional Hadamard
// peephole terms from the cell state. Updates `state` in place and returns
// the new hidden tensor.
template <typename T>
Tensor<T> convlstm_cell_forward(const Tensor<T>& x, LayerState<T>& state,
                                const ConvLstmLayer<T>& layer, bool peephole);

// Retained activations for backpropagation through time.
template <typename T>
struct LayerCache {
  std::vector<Tensor<T>> x;      // layer inputs per step (Cin, H, W)
  std::vector<Tensor<T>> h;      // hidden outputs per step, pre-ReLU
  std::vector<Tensor<T>> c;      // cell states per step
  std::vector<Tensor<T>> gates;  // (4C, H, W) post-activation i,f,g,o
};

template <typename T>
struct StackCache {
  std::vector<LayerCache<T>> layers;
};

// The recurrent backbone: `cfg.layers` stacked cells with ReLU between
// layers. Packs gate kernels once at construction, so one instance can be
// shared by concurrent per-sample forward/backward calls.
template <typename T>
class ConvLstmStack {
 public:
  explicit ConvLstmStack(const ModelParams<T>& params);
  ~ConvLstmStack();

  // x_seq (T, Cin, H, W) -> top-layer hidden sequence (T, C, H, W).
  // Pass a cache to retain activations for backward().
  Tensor<T> forward(const Tensor<T>& x_seq, StackCache<T>* cache) const;

  // d_top is the loss gradient on the top hidden sequence. Accumulates
  // parameter gradients into `grads` (same structure as the params).
  void backward(const StackCache<T>& cache, const Tensor<T>& d_top, ModelParams<T>& grads) const;

  const ModelParams<T>& params() const { return *params_; }

 private:
  struct Impl;
  const ModelParams<T>* params_;
  std::unique_ptr<Impl> impl_;
};

// 3-D convolution head over (time, height, width), same padding,
// C -> 1 channels. feats (T, C, H, W) -> (T, 1, H, W).
template <typename T>
Tensor<T> conv3d_head_forward(const Tensor<T>& feats, const Tensor<T>& kernel,
                              const Tensor<T>& bias);

template <typename T>
void conv3d_head_backward(const Tensor<T>& feats, const Tensor<T>& kernel, const Tensor<T>& d_out,
                          Tensor<T>* d_feats, Tensor<T>* d_kernel, Tensor<T>* d_bias);

// Two-layer 2-D conv classifier over width-concatenated token features.
template <typename T>
struct SegHeadCache {
  Tensor<T> concat;  // (C, H, T*W)
  Tensor<T> pre1;    // (hidden, H, T*W) before ReLU
};

template <typename T>
Tensor<T> seg_head_logits(const Tensor<T>& feats, const ModelParams<T>& params,
                          SegHeadCache<T>* cache);

template <typename T>
void seg_head_backward(const SegHeadCache<T>& cache, const ModelParams<T>& params,
                       const Tensor<T>& d_logits, Tensor<T>* d_feats, ModelParams<T>& grads);

// Per-pixel softmax over the leading (class) dimension.
template <typename T>
Tensor<T> softmax_classes(const Tensor<T>& logits);

// Batched contract-level wrappers.
// tokens (N, T, Cin, H, W) -> features (N, T, C, H, W)
template <typename T>
Tensor<T> backbone_forward(const ModelParams<T>& params, const Tensor<T>& tokens);
// features (N, T, C, H, W) -> predicted tokens (N, T, 1, H, W)
template <typename T>
Tensor<T> msm_head_forward(const ModelParams<T>& params, const Tensor<T>& feats);
// features (N, T, C, H, W) -> next-token prediction (N, 1, H, W): the
// initial time index of the 3-D conv output, remaining outputs discarded.
template <typename T>
Tensor<T> forecast_head_forward(const ModelParams<T>& params, const Tensor<T>& feats);
// features (N, T, C, H, W) with T == cfg.tokens_per_sentence ->
// class probabilities (N, classes, H, T*W).
template <typename T>
Tensor<T> segmentation_head_forward(const ModelParams<T>& params, const Tensor<T>& feats);

extern template class ConvLstmStack<float>;
extern template class ConvLstmStack<double>;

}  // namespace speclearn
