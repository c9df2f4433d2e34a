#pragma once

// Internal convolution machinery: im2col layout plus Eigen GEMM. Not part of
// the installed interface.

#include <Eigen/Dense>

#include "speclearn/tensor.hpp"

namespace speclearn::detail {

template <typename T>
using MatRM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapRM = Eigen::Map<MatRM<T>>;
template <typename T>
using CMapRM = Eigen::Map<const MatRM<T>>;

// x (C, H, W) row-major -> cols (C*k*k, H*W), same padding, stride 1.
// Row index: c*k*k + dy*k + dx. Column index: y*W + x.
template <typename T>
void im2col(const T* x, int64_t c_in, int64_t h, int64_t w, int64_t k, MatRM<T>& cols) {
  const int64_t pad = (k - 1) / 2;
  cols.resize(c_in * k * k, h * w);
  for (int64_t c = 0; c < c_in; ++c) {
    const T* plane = x + c * h * w;
    for (int64_t dy = 0; dy < k; ++dy) {
      for (int64_t dx = 0; dx < k; ++dx) {
        T* row = cols.data() + (c * k * k + dy * k + dx) * (h * w);
        for (int64_t y = 0; y < h; ++y) {
          const int64_t sy = y + dy - pad;
          T* dst = row + y * w;
          if (sy < 0 || sy >= h) {
            std::fill(dst, dst + w, T(0));
            continue;
          }
          const T* src = plane + sy * w;
          const int64_t shift = dx - pad;  // source x = dest x + shift
          const int64_t x_lo = std::max<int64_t>(0, -shift);
          const int64_t x_hi = std::min<int64_t>(w, w - shift);
          if (x_lo > 0) std::fill(dst, dst + x_lo, T(0));
          if (x_hi > x_lo) std::copy(src + x_lo + shift, src + x_hi + shift, dst + x_lo);
          if (x_hi < w) std::fill(dst + std::max(x_hi, x_lo), dst + w, T(0));
        }
      }
    }
  }
}

// Scatter-add the column gradient back to image layout.
template <typename T>
void col2im_add(const MatRM<T>& cols, int64_t c_in, int64_t h, int64_t w, int64_t k, T* dx) {
  const int64_t pad = (k - 1) / 2;
  for (int64_t c = 0; c < c_in; ++c) {
    T* plane = dx + c * h * w;
    for (int64_t dy = 0; dy < k; ++dy) {
      for (int64_t dx_k = 0; dx_k < k; ++dx_k) {
        const T* row = cols.data() + (c * k * k + dy * k + dx_k) * (h * w);
        for (int64_t y = 0; y < h; ++y) {
          const int64_t sy = y + dy - pad;
          if (sy < 0 || sy >= h) continue;
          const int64_t shift = dx_k - pad;
          const int64_t x_lo = std::max<int64_t>(0, -shift);
          const int64_t x_hi = std::min<int64_t>(w, w - shift);
          T* dst = plane + sy * w;
          const T* src = row + y * w;
          for (int64_t x = x_lo; x < x_hi; ++x) dst[x + shift] += src[x];
        }
      }
    }
  }
}

// Plain 2-D convolution, same padding: y (C_out, H, W) = W_mat * im2col(x) + b.
// kernel is (C_out, C_in, k, k) row-major; bias may be empty or (C_out).
template <typename T>
void conv2d_forward(const Tensor<T>& x, const Tensor<T>& kernel, const Tensor<T>& bias,
                    Tensor<T>& y, MatRM<T>& cols_scratch) {
  const int64_t c_in = x.dim(0), h = x.dim(1), w = x.dim(2);
  const int64_t c_out = kernel.dim(0), k = kernel.dim(2);
  im2col(x.data(), c_in, h, w, k, cols_scratch);
  CMapRM<T> wmat(kernel.data(), c_out, c_in * k * k);
  MapRM<T> ymat(y.data(), c_out, h * w);
  ymat.noalias() = wmat * cols_scratch;
  if (bias.size() == c_out) {
    for (int64_t c = 0; c < c_out; ++c) {
      T* row = y.data() + c * h * w;
      const T b = bias[c];
      for (int64_t i = 0; i < h * w; ++i) row[i] += b;
    }
  }
}

// Backward pass for conv2d_forward. d_kernel/d_bias/d_x accumulate.
template <typename T>
void conv2d_backward(const Tensor<T>& x, const Tensor<T>& kernel, const Tensor<T>& d_y,
                     Tensor<T>* d_x, Tensor<T>* d_kernel, Tensor<T>* d_bias,
                     MatRM<T>& cols_scratch, MatRM<T>& dcols_scratch) {
  const int64_t c_in = x.dim(0), h = x.dim(1), w = x.dim(2);
  const int64_t c_out = kernel.dim(0), k = kernel.dim(2);
  CMapRM<T> dymat(d_y.data(), c_out, h * w);
  if (d_kernel) {
    im2col(x.data(), c_in, h, w, k, cols_scratch);
    MapRM<T> dwmat(d_kernel->data(), c_out, c_in * k * k);
    dwmat.noalias() += dymat * cols_scratch.transpose();
  }
  if (d_bias) {
    for (int64_t c = 0; c < c_out; ++c) {
      T acc = T(0);
      const T* row = d_y.data() + c * h * w;
      for (int64_t i = 0; i < h * w; ++i) acc += row[i];
      (*d_bias)[c] += acc;
    }
  }
  if (d_x) {
    CMapRM<T> wmat(kernel.data(), c_out, c_in * k * k);
    dcols_scratch.resize(c_in * k * k, h * w);
    dcols_scratch.noalias() = wmat.transpose() * dymat;
    col2im_add(dcols_scratch, c_in, h, w, k, d_x->data());
  }
}

}  // namespace speclearn::detail
