#pragma once

#include <map>
#include <string>

#include "speclearn/model_params.hpp"

namespace speclearn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adaptive moment estimation over the named parameter set. Frozen tensors
// are skipped entirely: no state is ever allocated for them.
template <typename T>
class AdamOptimizer {
 public:
  explicit AdamOptimizer(const AdamConfig& cfg) : cfg_(cfg) {}

  void step(ModelParams<T>& params, const ModelParams<T>& grads);

  bool has_state(const std::string& name) const { return m_.find(name) != m_.end(); }
  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  int64_t t_ = 0;
  std::map<std::string, Tensor<T>> m_;
  std::map<std::string, Tensor<T>> v_;
};

extern template class AdamOptimizer<float>;
extern template class AdamOptimizer<double>;

}  // namespace speclearn
