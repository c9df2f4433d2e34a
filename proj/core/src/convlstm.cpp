#include "speclearn/model.hpp"

#include <cmath>

#include "conv_ops.hpp"
#include "speclearn/errors.hpp"

namespace speclearn {

using detail::CMapRM;
using detail::MapRM;
using detail::MatRM;

namespace {

template <typename T>
T sigmoid(T v) {
  return T(1) / (T(1) + std::exp(-v));
}

// Elementwise cell update given stacked gate pre-activations. pre (4C, H*W)
// is transformed in place into post-activation gates.
template <typename T>
void cell_pointwise(T* pre, const T* c_prev, T* c_new, T* h_new, int64_t plane,
                    const ConvLstmLayer<T>& lp, bool peephole) {
  T* pi = pre;
  T* pf = pre + plane;
  T* pg = pre + 2 * plane;
  T* po = pre + 3 * plane;
  const T* bi = lp.bias[kGateI].data();
  const T* bf = lp.bias[kGateF].data();
  const T* bg = lp.bias[kGateG].data();
  const T* bo = lp.bias[kGateO].data();
  const T* wci = peephole ? lp.peep[0].data() : nullptr;
  const T* wcf = peephole ? lp.peep[1].data() : nullptr;
  const T* wco = peephole ? lp.peep[2].data() : nullptr;

  for (int64_t j = 0; j < plane; ++j) {
    T zi = pi[j] + bi[j];
    T zf = pf[j] + bf[j];
    const T zg = pg[j] + bg[j];
    if (peephole) {
      zi += wci[j] * c_prev[j];
      zf += wcf[j] * c_prev[j];
    }
    const T i = sigmoid(zi);
    const T f = sigmoid(zf);
    const T g = std::tanh(zg);
    const T c = f * c_prev[j] + i * g;
    T zo = po[j] + bo[j];
    if (peephole) zo += wco[j] * c;
    const T o = sigmoid(zo);
    c_new[j] = c;
    h_new[j] = o * std::tanh(c);
    pi[j] = i;
    pf[j] = f;
    pg[j] = g;
    po[j] = o;
  }
}

template <typename T>
struct PackedLayer {
  MatRM<T> wx;  // (4C, Cin*k*k)
  MatRM<T> wh;  // (4C, C*k*k)
};

template <typename T>
PackedLayer<T> pack_layer(const ConvLstmLayer<T>& lp) {
  PackedLayer<T> out;
  const int64_t c = lp.w_x[0].dim(0);
  const int64_t xin = lp.w_x[0].size() / c;
  const int64_t hin = lp.w_h[0].size() / c;
  out.wx.resize(4 * c, xin);
  out.wh.resize(4 * c, hin);
  for (int g = 0; g < 4; ++g) {
    std::copy(lp.w_x[static_cast<size_t>(g)].data(), lp.w_x[static_cast<size_t>(g)].data() + c * xin,
              out.wx.data() + g * c * xin);
    std::copy(lp.w_h[static_cast<size_t>(g)].data(), lp.w_h[static_cast<size_t>(g)].data() + c * hin,
              out.wh.data() + g * c * hin);
  }
  return out;
}

}  // namespace

template <typename T>
Tensor<T> convlstm_cell_forward(const Tensor<T>& x, LayerState<T>& state,
                                const ConvLstmLayer<T>& layer, bool peephole) {
  const int64_t c = layer.w_x[0].dim(0);
  const int64_t cin = layer.w_x[0].dim(1);
  const int64_t k = layer.w_x[0].dim(2);
  if (x.rank() != 3 || x.dim(0) != cin) throw DimensionError("cell input shape mismatch");
  const int64_t h = x.dim(1), w = x.dim(2);
  if (state.h.size() == 0) state = LayerState<T>::zeros(c, h, w);
  if (state.h.dim(0) != c || state.h.dim(1) != h || state.h.dim(2) != w ||
      !state.c.same_shape(state.h)) {
    throw DimensionError("cell state shape mismatch");
  }
  if (layer.bias[0].dim(1) != h || layer.bias[0].dim(2) != w) {
    throw DimensionError("bias map does not match the spatial size");
  }

  const PackedLayer<T> packed = pack_layer(layer);
  MatRM<T> xcol, hcol;
  detail::im2col(x.data(), cin, h, w, k, xcol);
  detail::im2col(state.h.data(), c, h, w, k, hcol);
  MatRM<T> pre(4 * c, h * w);
  pre.noalias() = packed.wx * xcol;
  pre.noalias() += packed.wh * hcol;

  Tensor<T> c_new({c, h, w});
  Tensor<T> h_new({c, h, w});
  cell_pointwise(pre.data(), state.c.data(), c_new.data(), h_new.data(), c * h * w, layer,
                 peephole);
  state.c = c_new;
  state.h = h_new;
  return h_new;
}

template <typename T>
struct ConvLstmStack<T>::Impl {
  std::vector<PackedLayer<T>> packed;
};

template <typename T>
ConvLstmStack<T>::ConvLstmStack(const ModelParams<T>& params)
    : params_(&params), impl_(new Impl) {
  for (const auto& layer : params.layers) impl_->packed.push_back(pack_layer(layer));
}

template <typename T>
ConvLstmStack<T>::~ConvLstmStack() = default;

template <typename T>
Tensor<T> ConvLstmStack<T>::forward(const Tensor<T>& x_seq, StackCache<T>* cache) const {
  const ModelConfig& cfg = params_->cfg;
  if (x_seq.rank() != 4) throw DimensionError("stack input must be (T, Cin, H, W)");
  const int64_t t_len = x_seq.dim(0);
  if (t_len == 0) throw DataError("empty token sequence");
  if (x_seq.dim(1) != cfg.input_channels) throw DimensionError("wrong input channel count");
  const int64_t h = x_seq.dim(2), w = x_seq.dim(3);
  if (h != cfg.token_height || w != cfg.token_width) {
    throw DimensionError("token spatial size does not match the model");
  }
  const int64_t c = cfg.channels;
  const int64_t plane = c * h * w;

  if (cache) cache->layers.assign(static_cast<size_t>(cfg.layers), {});

  MatRM<T> xcol, hcol, pre(4 * c, h * w);
  std::vector<Tensor<T>> cur(static_cast<size_t>(t_len));
  for (int64_t t = 0; t < t_len; ++t) {
    Tensor<T> x_t({x_seq.dim(1), h, w});
    std::copy(x_seq.data() + t * x_t.size(), x_seq.data() + (t + 1) * x_t.size(), x_t.data());
    cur[static_cast<size_t>(t)] = std::move(x_t);
  }

  for (int l = 0; l < cfg.layers; ++l) {
    const auto& lp = params_->layers[static_cast<size_t>(l)];
    const auto& pk = impl_->packed[static_cast<size_t>(l)];
    const int64_t cin = cur[0].dim(0);
    Tensor<T> h_prev({c, h, w});
    Tensor<T> c_prev({c, h, w});
    LayerCache<T>* lc = cache ? &cache->layers[static_cast<size_t>(l)] : nullptr;
    if (lc) {
      lc->x = std::move(cur);
      cur.assign(static_cast<size_t>(t_len), {});
    }

    std::vector<Tensor<T>> out(static_cast<size_t>(t_len));
    for (int64_t t = 0; t < t_len; ++t) {
      const Tensor<T>& x_t = lc ? lc->x[static_cast<size_t>(t)] : cur[static_cast<size_t>(t)];
      detail::im2col(x_t.data(), cin, h, w, cfg.kernel, xcol);
      detail::im2col(h_prev.data(), c, h, w, cfg.kernel, hcol);
      pre.noalias() = pk.wx * xcol;
      pre.noalias() += pk.wh * hcol;

      Tensor<T> c_new({c, h, w});
      Tensor<T> h_new({c, h, w});
      cell_pointwise(pre.data(), c_prev.data(), c_new.data(), h_new.data(), plane, lp,
                     cfg.peephole);
      if (lc) {
        Tensor<T> gates({4 * c, h, w});
        std::copy(pre.data(), pre.data() + 4 * plane, gates.data());
        lc->gates.push_back(std::move(gates));
        lc->c.push_back(c_new);
        lc->h.push_back(h_new);
      }
      h_prev = h_new;
      c_prev = std::move(c_new);
      out[static_cast<size_t>(t)] = std::move(h_new);
    }

    // ReLU between layers; the top layer's hidden sequence passes through raw.
    if (l + 1 < cfg.layers) {
      for (auto& ht : out) {
        for (int64_t i = 0; i < ht.size(); ++i) ht[i] = ht[i] > T(0) ? ht[i] : T(0);
      }
    }
    cur = std::move(out);
  }

  Tensor<T> feats({t_len, c, h, w});
  for (int64_t t = 0; t < t_len; ++t) {
    std::copy(cur[static_cast<size_t>(t)].data(), cur[static_cast<size_t>(t)].data() + plane,
              feats.data() + t * plane);
  }
  return feats;
}

template <typename T>
void ConvLstmStack<T>::backward(const StackCache<T>& cache, const Tensor<T>& d_top,
                                ModelParams<T>& grads) const {
  const ModelConfig& cfg = params_->cfg;
  const int64_t c = cfg.channels;
  const int64_t h = cfg.token_height, w = cfg.token_width;
  const int64_t plane = c * h * w;
  const int64_t t_len = d_top.dim(0);
  const int64_t k = cfg.kernel;

  // dh_ext: gradient flowing into each step's hidden output from above.
  std::vector<Tensor<T>> dh_ext(static_cast<size_t>(t_len));
  for (int64_t t = 0; t < t_len; ++t) {
    Tensor<T> g({c, h, w});
    std::copy(d_top.data() + t * plane, d_top.data() + (t + 1) * plane, g.data());
    dh_ext[static_cast<size_t>(t)] = std::move(g);
  }

  MatRM<T> xcol, hcol, dcols;
  MatRM<T> d_pre(4 * c, h * w);

  for (int l = cfg.layers - 1; l >= 0; --l) {
    const auto& lp = params_->layers[static_cast<size_t>(l)];
    const auto& pk = impl_->packed[static_cast<size_t>(l)];
    const auto& lc = cache.layers[static_cast<size_t>(l)];
    const int64_t cin = lc.x[0].dim(0);
    auto& lg = grads.layers[static_cast<size_t>(l)];

    MatRM<T> dwx_acc = MatRM<T>::Zero(4 * c, cin * k * k);
    MatRM<T> dwh_acc = MatRM<T>::Zero(4 * c, c * k * k);

    std::vector<Tensor<T>> dx(static_cast<size_t>(t_len));
    Tensor<T> dh_rec({c, h, w});
    Tensor<T> dc_rec({c, h, w});

    const T* wci = cfg.peephole ? lp.peep[0].data() : nullptr;
    const T* wcf = cfg.peephole ? lp.peep[1].data() : nullptr;
    const T* wco = cfg.peephole ? lp.peep[2].data() : nullptr;
    T* dwci = cfg.peephole ? lg.peep[0].data() : nullptr;
    T* dwcf = cfg.peephole ? lg.peep[1].data() : nullptr;
    T* dwco = cfg.peephole ? lg.peep[2].data() : nullptr;

    for (int64_t t = t_len - 1; t >= 0; --t) {
      const Tensor<T>& gates = lc.gates[static_cast<size_t>(t)];
      const T* gi = gates.data();
      const T* gf = gates.data() + plane;
      const T* gg = gates.data() + 2 * plane;
      const T* go = gates.data() + 3 * plane;
      const T* c_t = lc.c[static_cast<size_t>(t)].data();
      const T* c_prev = t > 0 ? lc.c[static_cast<size_t>(t - 1)].data() : nullptr;
      const T* dh_in = dh_ext[static_cast<size_t>(t)].data();

      T* dpi = d_pre.data();
      T* dpf = d_pre.data() + plane;
      T* dpg = d_pre.data() + 2 * plane;
      T* dpo = d_pre.data() + 3 * plane;
      T* dc = dc_rec.data();
      T* dh = dh_rec.data();

      for (int64_t j = 0; j < plane; ++j) {
        const T dh_t = dh_in[j] + dh[j];
        const T tc = std::tanh(c_t[j]);
        const T o = go[j];
        const T dpre_o = dh_t * tc * o * (T(1) - o);
        T dc_t = dc[j] + dh_t * o * (T(1) - tc * tc);
        if (wco) dc_t += dpre_o * wco[j];

        const T i = gi[j];
        const T f = gf[j];
        const T g = gg[j];
        const T cp = c_prev ? c_prev[j] : T(0);
        const T dpre_i = dc_t * g * i * (T(1) - i);
        const T dpre_f = dc_t * cp * f * (T(1) - f);
        const T dpre_g = dc_t * i * (T(1) - g * g);

        T dc_prev = dc_t * f;
        if (wci) dc_prev += dpre_i * wci[j];
        if (wcf) dc_prev += dpre_f * wcf[j];
        if (dwci) {
          dwci[j] += dpre_i * cp;
          dwcf[j] += dpre_f * cp;
          dwco[j] += dpre_o * c_t[j];
        }

        dpi[j] = dpre_i;
        dpf[j] = dpre_f;
        dpg[j] = dpre_g;
        dpo[j] = dpre_o;
        dc[j] = dc_prev;
        dh[j] = T(0);  // refilled below from the recurrent conv path
      }

      // bias map gradients are the pre-activation gradients themselves
      for (int g = 0; g < 4; ++g) {
        T* dst = lg.bias[static_cast<size_t>(g)].data();
        const T* src = d_pre.data() + g * plane;
        for (int64_t j = 0; j < plane; ++j) dst[j] += src[j];
      }

      detail::im2col(lc.x[static_cast<size_t>(t)].data(), cin, h, w, k, xcol);
      dwx_acc.noalias() += d_pre * xcol.transpose();
      if (t > 0) {
        detail::im2col(lc.h[static_cast<size_t>(t - 1)].data(), c, h, w, k, hcol);
        dwh_acc.noalias() += d_pre * hcol.transpose();
        // gradient into h_{t-1} through the recurrent convolutions
        dcols.resize(c * k * k, h * w);
        dcols.noalias() = pk.wh.transpose() * d_pre;
        detail::col2im_add(dcols, c, h, w, k, dh_rec.data());
      }

      Tensor<T>& dx_t = dx[static_cast<size_t>(t)];
      dx_t = Tensor<T>({cin, h, w});
      dcols.resize(cin * k * k, h * w);
      dcols.noalias() = pk.wx.transpose() * d_pre;
      detail::col2im_add(dcols, cin, h, w, k, dx_t.data());
    }

    // unpack accumulated kernel gradients
    for (int g = 0; g < 4; ++g) {
      T* dst = lg.w_x[static_cast<size_t>(g)].data();
      const T* src = dwx_acc.data() + g * c * cin * k * k;
      for (int64_t j = 0; j < c * cin * k * k; ++j) dst[j] += src[j];
      T* dsth = lg.w_h[static_cast<size_t>(g)].data();
      const T* srch = dwh_acc.data() + g * c * c * k * k;
      for (int64_t j = 0; j < c * c * k * k; ++j) dsth[j] += srch[j];
    }

    if (l > 0) {
      // pass through the inter-layer ReLU: x of this layer is relu(h below)
      for (int64_t t = 0; t < t_len; ++t) {
        const Tensor<T>& x_t = lc.x[static_cast<size_t>(t)];
        Tensor<T>& g = dx[static_cast<size_t>(t)];
        for (int64_t j = 0; j < g.size(); ++j) {
          if (x_t[j] <= T(0)) g[j] = T(0);
        }
        dh_ext[static_cast<size_t>(t)] = std::move(g);
      }
    }
  }
}

template <typename T>
Tensor<T> backbone_forward(const ModelParams<T>& params, const Tensor<T>& tokens) {
  if (tokens.rank() != 5) throw DimensionError("expected (N, T, Cin, H, W) tokens");
  const int64_t n = tokens.dim(0), t_len = tokens.dim(1);
  if (t_len == 0) throw DataError("empty token sequence");
  const ConvLstmStack<T> stack(params);
  Tensor<T> out({n, t_len, params.cfg.channels, tokens.dim(3), tokens.dim(4)});
  const int64_t in_stride = tokens.size() / std::max<int64_t>(n, 1);
  const int64_t out_stride = out.size() / std::max<int64_t>(n, 1);
  for (int64_t s = 0; s < n; ++s) {
    Tensor<T> x({t_len, tokens.dim(2), tokens.dim(3), tokens.dim(4)});
    std::copy(tokens.data() + s * in_stride, tokens.data() + (s + 1) * in_stride, x.data());
    const Tensor<T> f = stack.forward(x, nullptr);
    std::copy(f.data(), f.data() + out_stride, out.data() + s * out_stride);
  }
  return out;
}

template Tensor<float> convlstm_cell_forward<float>(const Tensor<float>&, LayerState<float>&,
                                                    const ConvLstmLayer<float>&, bool);
template Tensor<double> convlstm_cell_forward<double>(const Tensor<double>&, LayerState<double>&,
                                                      const ConvLstmLayer<double>&, bool);
template class ConvLstmStack<float>;
template class ConvLstmStack<double>;
template Tensor<float> backbone_forward<float>(const ModelParams<float>&, const Tensor<float>&);
template Tensor<double> backbone_forward<double>(const ModelParams<double>&, const Tensor<double>&);

}  // namespace speclearn
