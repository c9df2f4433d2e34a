#include "speclearn/model_params.hpp"

#include <cmath>

#include "speclearn/rng.hpp"

namespace speclearn {

namespace {
constexpr const char* kGateNames[4] = {"i", "f", "g", "o"};
constexpr const char* kPeepNames[3] = {"i", "f", "o"};
}  // namespace

template <typename T>
ModelParams<T> ModelParams<T>::shaped(const ModelConfig& cfg) {
  cfg.validate();
  ModelParams<T> p;
  p.cfg = cfg;
  const int64_t c = cfg.channels, k = cfg.kernel;
  const int64_t h = cfg.token_height, w = cfg.token_width;
  p.layers.resize(static_cast<size_t>(cfg.layers));
  for (int l = 0; l < cfg.layers; ++l) {
    const int64_t cin = l == 0 ? cfg.input_channels : c;
    auto& layer = p.layers[static_cast<size_t>(l)];
    for (int g = 0; g < 4; ++g) {
      layer.w_x[static_cast<size_t>(g)] = Tensor<T>({c, cin, k, k});
      layer.w_h[static_cast<size_t>(g)] = Tensor<T>({c, c, k, k});
      layer.bias[static_cast<size_t>(g)] = Tensor<T>({c, h, w});
    }
    if (cfg.peephole) {
      for (int g = 0; g < 3; ++g) layer.peep[static_cast<size_t>(g)] = Tensor<T>({c, h, w});
    }
  }
  p.msm_kernel = Tensor<T>({1, c, k, k, k});
  p.msm_bias = Tensor<T>({1});
  p.forecast_kernel = Tensor<T>({1, c, k, k, k});
  p.forecast_bias = Tensor<T>({1});
  p.seg_w1 = Tensor<T>({cfg.seg_hidden, c, k, k});
  p.seg_b1 = Tensor<T>({cfg.seg_hidden});
  p.seg_w2 = Tensor<T>({cfg.seg_classes, cfg.seg_hidden, k, k});
  p.seg_b2 = Tensor<T>({cfg.seg_classes});
  return p;
}

template <typename T>
void ModelParams<T>::for_each(const std::function<void(const std::string&, Tensor<T>&)>& fn) {
  for (size_t l = 0; l < layers.size(); ++l) {
    const std::string prefix = "backbone." + std::to_string(l) + ".";
    for (int g = 0; g < 4; ++g) {
      fn(prefix + "wx_" + kGateNames[g], layers[l].w_x[static_cast<size_t>(g)]);
    }
    for (int g = 0; g < 4; ++g) {
      fn(prefix + "wh_" + kGateNames[g], layers[l].w_h[static_cast<size_t>(g)]);
    }
    for (int g = 0; g < 4; ++g) {
      fn(prefix + "b_" + kGateNames[g], layers[l].bias[static_cast<size_t>(g)]);
    }
    if (cfg.peephole) {
      for (int g = 0; g < 3; ++g) {
        fn(prefix + "peep_" + kPeepNames[g], layers[l].peep[static_cast<size_t>(g)]);
      }
    }
  }
  fn("head.msm.kernel", msm_kernel);
  fn("head.msm.bias", msm_bias);
  fn("head.forecast.kernel", forecast_kernel);
  fn("head.forecast.bias", forecast_bias);
  fn("head.seg.w1", seg_w1);
  fn("head.seg.b1", seg_b1);
  fn("head.seg.w2", seg_w2);
  fn("head.seg.b2", seg_b2);
}

template <typename T>
void ModelParams<T>::for_each(
    const std::function<void(const std::string&, const Tensor<T>&)>& fn) const {
  const_cast<ModelParams*>(this)->for_each(
      [&](const std::string& name, Tensor<T>& t) { fn(name, t); });
}

template <typename T>
int64_t ModelParams<T>::parameter_count() const {
  int64_t n = 0;
  for_each([&](const std::string&, const Tensor<T>& t) { n += t.size(); });
  return n;
}

template <typename T>
ModelParams<T> init_weights(const ModelConfig& cfg, uint64_t seed) {
  ModelParams<T> p = ModelParams<T>::shaped(cfg);
  Rng rng(seed);
  const auto fill_uniform = [&](Tensor<T>& t, int64_t fan_in) {
    const double a = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (int64_t i = 0; i < t.size(); ++i) t[i] = static_cast<T>(rng.uniform(-a, a));
  };

  const int64_t kk = static_cast<int64_t>(cfg.kernel) * cfg.kernel;
  for (size_t l = 0; l < p.layers.size(); ++l) {
    const int64_t cin = l == 0 ? cfg.input_channels : cfg.channels;
    for (int g = 0; g < 4; ++g) {
      fill_uniform(p.layers[l].w_x[static_cast<size_t>(g)], cin * kk);
      fill_uniform(p.layers[l].w_h[static_cast<size_t>(g)], cfg.channels * kk);
    }
    p.layers[l].bias[kGateF].fill(T(1));  // forget gate opens at init
  }
  fill_uniform(p.msm_kernel, cfg.channels * kk * cfg.kernel);
  fill_uniform(p.forecast_kernel, cfg.channels * kk * cfg.kernel);
  fill_uniform(p.seg_w1, cfg.channels * kk);
  fill_uniform(p.seg_w2, cfg.seg_hidden * kk);
  return p;
}

template <typename T>
void freeze_backbone(ModelParams<T>& params) {
  params.for_each([&](const std::string& name, Tensor<T>&) {
    if (name.rfind("backbone.", 0) == 0) params.frozen.insert(name);
  });
}

template struct ModelParams<float>;
template struct ModelParams<double>;
template ModelParams<float> init_weights<float>(const ModelConfig&, uint64_t);
template ModelParams<double> init_weights<double>(const ModelConfig&, uint64_t);
template void freeze_backbone<float>(ModelParams<float>&);
template void freeze_backbone<double>(ModelParams<double>&);

}  // namespace speclearn
