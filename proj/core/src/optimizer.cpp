#include "speclearn/optimizer.hpp"

#include <cmath>
#include <vector>

namespace speclearn {

template <typename T>
void AdamOptimizer<T>::step(ModelParams<T>& params, const ModelParams<T>& grads) {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));

  std::vector<const Tensor<T>*> flat;
  grads.for_each([&](const std::string&, const Tensor<T>& g) { flat.push_back(&g); });

  size_t idx = 0;
  params.for_each([&](const std::string& name, Tensor<T>& p) {
    const Tensor<T>& g = *flat[idx++];
    if (!params.trainable(name)) return;
    auto& m = m_.try_emplace(name, Tensor<T>(p.shape())).first->second;
    auto& v = v_.try_emplace(name, Tensor<T>(p.shape())).first->second;
    for (int64_t j = 0; j < p.size(); ++j) {
      const double gj = g[j];
      const double mj = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * gj;
      const double vj = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * gj * gj;
      m[j] = static_cast<T>(mj);
      v[j] = static_cast<T>(vj);
      const double mhat = mj / bc1;
      const double vhat = vj / bc2;
      p[j] = static_cast<T>(p[j] - cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps));
    }
  });
}

template class AdamOptimizer<float>;
template class AdamOptimizer<double>;

}  // namespace speclearn
