#include <cmath>

#include "conv_ops.hpp"
#include "speclearn/errors.hpp"
#include "speclearn/model.hpp"

namespace speclearn {

using detail::CMapRM;
using detail::MapRM;
using detail::MatRM;

namespace {

// Extract the k time-slices of a (1, C, kt, kh, kw) kernel as (1, C*kh*kw)
// row vectors usable with im2col output.
template <typename T>
std::vector<MatRM<T>> slice_time_kernels(const Tensor<T>& kernel) {
  const int64_t c = kernel.dim(1), kt = kernel.dim(2), kh = kernel.dim(3), kw = kernel.dim(4);
  std::vector<MatRM<T>> out(static_cast<size_t>(kt));
  for (int64_t dt = 0; dt < kt; ++dt) {
    MatRM<T>& m = out[static_cast<size_t>(dt)];
    m.resize(1, c * kh * kw);
    for (int64_t ch = 0; ch < c; ++ch) {
      for (int64_t y = 0; y < kh; ++y) {
        for (int64_t x = 0; x < kw; ++x) {
          m(0, ch * kh * kw + y * kw + x) = kernel.at(0, ch, dt, y, x);
        }
      }
    }
  }
  return out;
}

template <typename T>
void scatter_time_kernel_grad(const std::vector<MatRM<T>>& dk2d, Tensor<T>& d_kernel) {
  const int64_t c = d_kernel.dim(1), kt = d_kernel.dim(2), kh = d_kernel.dim(3), kw = d_kernel.dim(4);
  for (int64_t dt = 0; dt < kt; ++dt) {
    const MatRM<T>& m = dk2d[static_cast<size_t>(dt)];
    for (int64_t ch = 0; ch < c; ++ch) {
      for (int64_t y = 0; y < kh; ++y) {
        for (int64_t x = 0; x < kw; ++x) {
          d_kernel.at(0, ch, dt, y, x) += m(0, ch * kh * kw + y * kw + x);
        }
      }
    }
  }
}

}  // namespace

template <typename T>
Tensor<T> conv3d_head_forward(const Tensor<T>& feats, const Tensor<T>& kernel,
                              const Tensor<T>& bias) {
  if (feats.rank() != 4) throw DimensionError("conv3d head expects (T, C, H, W) features");
  const int64_t t_len = feats.dim(0), c = feats.dim(1), h = feats.dim(2), w = feats.dim(3);
  if (kernel.dim(1) != c) throw DimensionError("conv3d kernel channel mismatch");
  const int64_t kt = kernel.dim(2), k = kernel.dim(3);
  const int64_t pad = (kt - 1) / 2;

  Tensor<T> out({t_len, 1, h, w});
  out.fill(bias[0]);
  const auto kmats = slice_time_kernels(kernel);

  MatRM<T> cols;
  MatRM<T> y(1, h * w);
  for (int64_t s = 0; s < t_len; ++s) {  // each input step contributes to kt outputs
    detail::im2col(feats.data() + s * c * h * w, c, h, w, k, cols);
    for (int64_t dt = 0; dt < kt; ++dt) {
      const int64_t t = s + pad - dt;
      if (t < 0 || t >= t_len) continue;
      y.noalias() = kmats[static_cast<size_t>(dt)] * cols;
      T* dst = out.data() + t * h * w;
      for (int64_t i = 0; i < h * w; ++i) dst[i] += y.data()[i];
    }
  }
  return out;
}

template <typename T>
void conv3d_head_backward(const Tensor<T>& feats, const Tensor<T>& kernel, const Tensor<T>& d_out,
                          Tensor<T>* d_feats, Tensor<T>* d_kernel, Tensor<T>* d_bias) {
  const int64_t t_len = feats.dim(0), c = feats.dim(1), h = feats.dim(2), w = feats.dim(3);
  const int64_t kt = kernel.dim(2), k = kernel.dim(3);
  const int64_t pad = (kt - 1) / 2;

  if (d_bias) {
    T acc = T(0);
    for (int64_t i = 0; i < d_out.size(); ++i) acc += d_out[i];
    (*d_bias)[0] += acc;
  }

  const auto kmats = slice_time_kernels(kernel);
  std::vector<MatRM<T>> dkmats(static_cast<size_t>(kt));
  for (auto& m : dkmats) m = MatRM<T>::Zero(1, c * k * k);

  MatRM<T> cols, dcols;
  for (int64_t s = 0; s < t_len; ++s) {
    detail::im2col(feats.data() + s * c * h * w, c, h, w, k, cols);
    for (int64_t dt = 0; dt < kt; ++dt) {
      const int64_t t = s + pad - dt;
      if (t < 0 || t >= t_len) continue;
      CMapRM<T> dy(d_out.data() + t * h * w, 1, h * w);
      if (d_kernel) dkmats[static_cast<size_t>(dt)].noalias() += dy * cols.transpose();
      if (d_feats) {
        dcols.resize(c * k * k, h * w);
        dcols.noalias() = kmats[static_cast<size_t>(dt)].transpose() * dy;
        detail::col2im_add(dcols, c, h, w, k, d_feats->data() + s * c * h * w);
      }
    }
  }
  if (d_kernel) scatter_time_kernel_grad(dkmats, *d_kernel);
}

template <typename T>
Tensor<T> seg_head_logits(const Tensor<T>& feats, const ModelParams<T>& params,
                          SegHeadCache<T>* cache) {
  const ModelConfig& cfg = params.cfg;
  if (feats.rank() != 4) throw DimensionError("segmentation head expects (T, C, H, W) features");
  const int64_t t_len = feats.dim(0), c = feats.dim(1), h = feats.dim(2), w = feats.dim(3);
  if (t_len != cfg.tokens_per_sentence) {
    throw DimensionError("segmentation head needs exactly " +
                         std::to_string(cfg.tokens_per_sentence) + " feature tokens");
  }

  Tensor<T> concat({c, h, t_len * w});
  for (int64_t t = 0; t < t_len; ++t) {
    for (int64_t ch = 0; ch < c; ++ch) {
      for (int64_t y = 0; y < h; ++y) {
        std::copy(&feats.at(t, ch, y, 0), &feats.at(t, ch, y, 0) + w, &concat.at(ch, y, t * w));
      }
    }
  }

  MatRM<T> cols;
  Tensor<T> pre1({cfg.seg_hidden, h, t_len * w});
  detail::conv2d_forward(concat, params.seg_w1, params.seg_b1, pre1, cols);
  Tensor<T> hidden(pre1.shape());
  for (int64_t i = 0; i < pre1.size(); ++i) hidden[i] = pre1[i] > T(0) ? pre1[i] : T(0);

  Tensor<T> logits({cfg.seg_classes, h, t_len * w});
  detail::conv2d_forward(hidden, params.seg_w2, params.seg_b2, logits, cols);

  if (cache) {
    cache->concat = std::move(concat);
    cache->pre1 = std::move(pre1);
  }
  return logits;
}

template <typename T>
void seg_head_backward(const SegHeadCache<T>& cache, const ModelParams<T>& params,
                       const Tensor<T>& d_logits, Tensor<T>* d_feats, ModelParams<T>& grads) {
  const ModelConfig& cfg = params.cfg;
  const int64_t h = cache.concat.dim(1), wi = cache.concat.dim(2);
  const int64_t c = cache.concat.dim(0);
  const int64_t t_len = cfg.tokens_per_sentence;
  const int64_t w = wi / t_len;

  Tensor<T> hidden(cache.pre1.shape());
  for (int64_t i = 0; i < hidden.size(); ++i) {
    hidden[i] = cache.pre1[i] > T(0) ? cache.pre1[i] : T(0);
  }

  MatRM<T> cols, dcols;
  Tensor<T> d_hidden(hidden.shape());
  detail::conv2d_backward(hidden, params.seg_w2, d_logits, &d_hidden, &grads.seg_w2,
                          &grads.seg_b2, cols, dcols);
  for (int64_t i = 0; i < d_hidden.size(); ++i) {
    if (cache.pre1[i] <= T(0)) d_hidden[i] = T(0);
  }

  Tensor<T> d_concat({c, h, wi});
  detail::conv2d_backward(cache.concat, params.seg_w1, d_hidden, &d_concat, &grads.seg_w1,
                          &grads.seg_b1, cols, dcols);

  if (d_feats) {
    for (int64_t t = 0; t < t_len; ++t) {
      for (int64_t ch = 0; ch < c; ++ch) {
        for (int64_t y = 0; y < h; ++y) {
          const T* src = &d_concat.at(ch, y, t * w);
          T* dst = &d_feats->at(t, ch, y, 0);
          for (int64_t x = 0; x < w; ++x) dst[x] += src[x];
        }
      }
    }
  }
}

template <typename T>
Tensor<T> softmax_classes(const Tensor<T>& logits) {
  const int64_t k = logits.dim(0);
  const int64_t plane = logits.size() / k;
  Tensor<T> probs(logits.shape());
  for (int64_t j = 0; j < plane; ++j) {
    T mx = logits[j];
    for (int64_t c = 1; c < k; ++c) mx = std::max(mx, logits[c * plane + j]);
    T denom = T(0);
    for (int64_t c = 0; c < k; ++c) {
      const T e = std::exp(logits[c * plane + j] - mx);
      probs[c * plane + j] = e;
      denom += e;
    }
    for (int64_t c = 0; c < k; ++c) probs[c * plane + j] /= denom;
  }
  return probs;
}

template <typename T>
Tensor<T> msm_head_forward(const ModelParams<T>& params, const Tensor<T>& feats) {
  if (feats.rank() != 5) throw DimensionError("expected (N, T, C, H, W) features");
  const int64_t n = feats.dim(0), t_len = feats.dim(1), c = feats.dim(2);
  const int64_t h = feats.dim(3), w = feats.dim(4);
  Tensor<T> out({n, t_len, 1, h, w});
  for (int64_t s = 0; s < n; ++s) {
    Tensor<T> f({t_len, c, h, w});
    std::copy(feats.data() + s * f.size(), feats.data() + (s + 1) * f.size(), f.data());
    const Tensor<T> y = conv3d_head_forward(f, params.msm_kernel, params.msm_bias);
    std::copy(y.data(), y.data() + y.size(), out.data() + s * y.size());
  }
  return out;
}

template <typename T>
Tensor<T> forecast_head_forward(const ModelParams<T>& params, const Tensor<T>& feats) {
  if (feats.rank() != 5) throw DimensionError("expected (N, T, C, H, W) features");
  const int64_t n = feats.dim(0), t_len = feats.dim(1), c = feats.dim(2);
  const int64_t h = feats.dim(3), w = feats.dim(4);
  Tensor<T> out({n, 1, h, w});
  for (int64_t s = 0; s < n; ++s) {
    Tensor<T> f({t_len, c, h, w});
    std::copy(feats.data() + s * f.size(), feats.data() + (s + 1) * f.size(), f.data());
    const Tensor<T> y = conv3d_head_forward(f, params.forecast_kernel, params.forecast_bias);
    // keep the initial time index only
    std::copy(y.data(), y.data() + h * w, out.data() + s * h * w);
  }
  return out;
}

template <typename T>
Tensor<T> segmentation_head_forward(const ModelParams<T>& params, const Tensor<T>& feats) {
  if (feats.rank() != 5) throw DimensionError("expected (N, T, C, H, W) features");
  const int64_t n = feats.dim(0), t_len = feats.dim(1), c = feats.dim(2);
  const int64_t h = feats.dim(3), w = feats.dim(4);
  Tensor<T> out({n, params.cfg.seg_classes, h, t_len * w});
  for (int64_t s = 0; s < n; ++s) {
    Tensor<T> f({t_len, c, h, w});
    std::copy(feats.data() + s * f.size(), feats.data() + (s + 1) * f.size(), f.data());
    const Tensor<T> probs = softmax_classes(seg_head_logits<T>(f, params, nullptr));
    std::copy(probs.data(), probs.data() + probs.size(), out.data() + s * probs.size());
  }
  return out;
}

#define SPECLEARN_INSTANTIATE_HEADS(T)                                                          \
  template Tensor<T> conv3d_head_forward<T>(const Tensor<T>&, const Tensor<T>&,                 \
                                            const Tensor<T>&);                                  \
  template void conv3d_head_backward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,   \
                                        Tensor<T>*, Tensor<T>*, Tensor<T>*);                    \
  template Tensor<T> seg_head_logits<T>(const Tensor<T>&, const ModelParams<T>&,               \
                                        SegHeadCache<T>*);                                      \
  template void seg_head_backward<T>(const SegHeadCache<T>&, const ModelParams<T>&,            \
                                     const Tensor<T>&, Tensor<T>*, ModelParams<T>&);           \
  template Tensor<T> softmax_classes<T>(const Tensor<T>&);                                      \
  template Tensor<T> msm_head_forward<T>(const ModelParams<T>&, const Tensor<T>&);             \
  template Tensor<T> forecast_head_forward<T>(const ModelParams<T>&, const Tensor<T>&);        \
  template Tensor<T> segmentation_head_forward<T>(const ModelParams<T>&, const Tensor<T>&);

SPECLEARN_INSTANTIATE_HEADS(float)
SPECLEARN_INSTANTIATE_HEADS(double)

}  // namespace speclearn
