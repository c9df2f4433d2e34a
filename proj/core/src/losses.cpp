#include "speclearn/losses.hpp"

#include <cmath>

#include "speclearn/errors.hpp"

namespace speclearn {

template <typename T>
T msm_loss(const Tensor<T>& pred, const Tensor<T>& target,
           const std::vector<std::vector<uint8_t>>& mask, Tensor<T>* d_pred) {
  if (!pred.same_shape(target)) throw DimensionError("msm_loss shape mismatch");
  if (pred.rank() != 4) throw DimensionError("msm_loss expects (N, T, F, W)");
  const int64_t n = pred.dim(0), t_len = pred.dim(1);
  const int64_t token = pred.dim(2) * pred.dim(3);
  if (static_cast<int64_t>(mask.size()) != n) throw DimensionError("mask batch mismatch");

  bool any = false;
  double loss = 0.0;
  if (d_pred) d_pred->fill(T(0));
  for (int64_t s = 0; s < n; ++s) {
    if (static_cast<int64_t>(mask[static_cast<size_t>(s)].size()) != t_len) {
      throw DimensionError("mask token count mismatch");
    }
    for (int64_t t = 0; t < t_len; ++t) {
      if (!mask[static_cast<size_t>(s)][static_cast<size_t>(t)]) continue;
      any = true;
      const T* p = pred.data() + (s * t_len + t) * token;
      const T* q = target.data() + (s * t_len + t) * token;
      T* g = d_pred ? d_pred->data() + (s * t_len + t) * token : nullptr;
      for (int64_t j = 0; j < token; ++j) {
        const double d = static_cast<double>(p[j]) - static_cast<double>(q[j]);
        loss += d * d;
        if (g) g[j] = static_cast<T>(2.0 * d);
      }
    }
  }
  if (!any) throw DataError("degenerate masked loss: no token is masked");
  return static_cast<T>(loss);
}

template <typename T>
T forecast_loss(const Tensor<T>& pred, const Tensor<T>& target, Tensor<T>* d_pred) {
  if (!pred.same_shape(target)) throw DimensionError("forecast_loss shape mismatch");
  double loss = 0.0;
  for (int64_t j = 0; j < pred.size(); ++j) {
    const double d = static_cast<double>(pred[j]) - static_cast<double>(target[j]);
    loss += d * d;
    if (d_pred) (*d_pred)[j] = static_cast<T>(2.0 * d);
  }
  return static_cast<T>(loss);
}

template <typename T>
T segmentation_loss(const Tensor<T>& probs, const LabelImage& labels) {
  if (probs.rank() != 3) throw DimensionError("segmentation_loss expects (K, H, W)");
  const int64_t k = probs.dim(0);
  const int64_t plane = probs.dim(1) * probs.dim(2);
  if (labels.size() != plane) throw DimensionError("label shape mismatch");

  constexpr double kEps = 1e-7;
  double loss = 0.0;
  for (int64_t j = 0; j < plane; ++j) {
    const auto y = static_cast<int64_t>(labels[j]);
    if (y < 0 || y >= k) throw DataError("label outside [0, K)");
    const double p = std::min(1.0, std::max(kEps, static_cast<double>(probs[y * plane + j])));
    loss -= std::log(p);
  }
  return static_cast<T>(loss);
}

template <typename T>
T softmax_ce_loss(const Tensor<T>& logits, const LabelImage& labels, Tensor<T>* d_logits) {
  if (logits.rank() != 3) throw DimensionError("softmax_ce_loss expects (K, H, W)");
  const int64_t k = logits.dim(0);
  const int64_t plane = logits.dim(1) * logits.dim(2);
  if (labels.size() != plane) throw DimensionError("label shape mismatch");

  double loss = 0.0;
  std::vector<double> p(static_cast<size_t>(k));
  for (int64_t j = 0; j < plane; ++j) {
    const auto y = static_cast<int64_t>(labels[j]);
    if (y < 0 || y >= k) throw DataError("label outside [0, K)");
    double mx = logits[j];
    for (int64_t c = 1; c < k; ++c) mx = std::max(mx, static_cast<double>(logits[c * plane + j]));
    double denom = 0.0;
    for (int64_t c = 0; c < k; ++c) {
      p[static_cast<size_t>(c)] = std::exp(static_cast<double>(logits[c * plane + j]) - mx);
      denom += p[static_cast<size_t>(c)];
    }
    loss -= std::log(p[static_cast<size_t>(y)] / denom);
    if (d_logits) {
      for (int64_t c = 0; c < k; ++c) {
        const double soft = p[static_cast<size_t>(c)] / denom;
        (*d_logits)[c * plane + j] = static_cast<T>(soft - (c == y ? 1.0 : 0.0));
      }
    }
  }
  return static_cast<T>(loss);
}

#define SPECLEARN_INSTANTIATE_LOSSES(T)                                                     \
  template T msm_loss<T>(const Tensor<T>&, const Tensor<T>&,                                \
                         const std::vector<std::vector<uint8_t>>&, Tensor<T>*);             \
  template T forecast_loss<T>(const Tensor<T>&, const Tensor<T>&, Tensor<T>*);              \
  template T segmentation_loss<T>(const Tensor<T>&, const LabelImage&);                     \
  template T softmax_ce_loss<T>(const Tensor<T>&, const LabelImage&, Tensor<T>*);

SPECLEARN_INSTANTIATE_LOSSES(float)
SPECLEARN_INSTANTIATE_LOSSES(double)

}  // namespace speclearn
