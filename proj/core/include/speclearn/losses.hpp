#pragma once

#include <cstdint>
#include <vector>

#include "speclearn/segdata.hpp"
#include "speclearn/tensor.hpp"

namespace speclearn {

// Masked reconstruction loss: per masked token, the squared L2 distance
// between vectorized target and predicted tokens, summed over the batch.
// pred/target (N, T, F, W); mask (N, T) flags. Optionally writes the
// gradient w.r.t. pred.
template <typename T>
T msm_loss(const Tensor<T>& pred, const Tensor<T>& target,
           const std::vector<std::vector<uint8_t>>& mask, Tensor<T>* d_pred = nullptr);

// Next-token loss: squared L2 distance summed over the batch.
// pred/target (N, F, W).
template <typename T>
T forecast_loss(const Tensor<T>& pred, const Tensor<T>& target, Tensor<T>* d_pred = nullptr);

// Cross entropy against integer labels, natural log, probabilities clamped
// to [1e-7, 1]. probs (K, H, W) per sample; labels (H, W).
template <typename T>
T segmentation_loss(const Tensor<T>& probs, const LabelImage& labels);

// Fused softmax + cross entropy on logits; same loss value as
// segmentation_loss(softmax(logits)) away from the clamp, with the standard
// (prob - onehot) gradient.
template <typename T>
T softmax_ce_loss(const Tensor<T>& logits, const LabelImage& labels,
                  Tensor<T>* d_logits = nullptr);

extern template float msm_loss<float>(const Tensor<float>&, const Tensor<float>&,
                                      const std::vector<std::vector<uint8_t>>&, Tensor<float>*);
extern template double msm_loss<double>(const Tensor<double>&, const Tensor<double>&,
                                        const std::vector<std::vector<uint8_t>>&, Tensor<double>*);

}  // namespace speclearn
