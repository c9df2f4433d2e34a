#include "speclearn/confusion.hpp"

#include <cmath>
#include <numeric>

#include "speclearn/errors.hpp"
#include "speclearn/rng.hpp"

namespace speclearn {

ConfusionMatrix::ConfusionMatrix(int n_classes, std::vector<std::string> class_names)
    : k_(n_classes), names_(std::move(class_names)),
      counts_(static_cast<size_t>(n_classes) * static_cast<size_t>(n_classes), 0) {
  if (n_classes < 1) throw ConfigError("confusion matrix needs >= 1 class");
  if (names_.empty()) {
    for (int i = 0; i < k_; ++i) names_.push_back("class" + std::to_string(i));
  }
  if (static_cast<int>(names_.size()) != k_) throw ConfigError("class name count mismatch");
}

void ConfusionMatrix::add_pixel(int64_t true_class, int64_t pred_class) {
  add_count(true_class, pred_class, 1);
}

void ConfusionMatrix::add_count(int64_t true_class, int64_t pred_class, int64_t n) {
  if (true_class < 0 || true_class >= k_ || pred_class < 0 || pred_class >= k_) {
    throw DataError("label outside [0, K)");
  }
  if (n < 0) throw DataError("negative confusion count");
  counts_[static_cast<size_t>(true_class * k_ + pred_class)] += n;
}

void ConfusionMatrix::add(const LabelImage& truth, const LabelImage& pred) {
  if (!truth.same_shape(pred)) throw DimensionError("confusion inputs differ in shape");
  for (int64_t i = 0; i < truth.size(); ++i) {
    add_pixel(static_cast<int64_t>(truth[i]), static_cast<int64_t>(pred[i]));
  }
}

int64_t ConfusionMatrix::at(int64_t true_class, int64_t pred_class) const {
  return counts_[static_cast<size_t>(true_class * k_ + pred_class)];
}

int64_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), int64_t{0});
}

int64_t ConfusionMatrix::row_sum(int64_t true_class) const {
  int64_t acc = 0;
  for (int64_t j = 0; j < k_; ++j) acc += at(true_class, j);
  return acc;
}

Tensor<double> ConfusionMatrix::row_normalized() const {
  Tensor<double> out({k_, k_});
  for (int64_t i = 0; i < k_; ++i) {
    const int64_t rs = row_sum(i);
    if (rs == 0) continue;
    for (int64_t j = 0; j < k_; ++j) {
      out.at(i, j) = static_cast<double>(at(i, j)) / static_cast<double>(rs);
    }
  }
  return out;
}

double ConfusionMatrix::recall(int64_t true_class) const {
  const int64_t rs = row_sum(true_class);
  return rs == 0 ? 0.0 : static_cast<double>(at(true_class, true_class)) / static_cast<double>(rs);
}

ConfusionMatrix ConfusionMatrix::merged_binary() const {
  ConfusionMatrix out(2, {names_[0], "signal"});
  for (int64_t i = 0; i < k_; ++i) {
    for (int64_t j = 0; j < k_; ++j) {
      const int64_t bi = i == 0 ? 0 : 1;
      const int64_t bj = j == 0 ? 0 : 1;
      out.counts_[static_cast<size_t>(bi * 2 + bj)] += at(i, j);
    }
  }
  return out;
}

LabelImage merge_to_binary(const LabelImage& labels) {
  LabelImage out(labels.shape());
  for (int64_t i = 0; i < labels.size(); ++i) {
    if (labels[i] > 2) throw DataError("label outside {0, 1, 2}");
    out[i] = labels[i] == 0 ? 0 : 1;
  }
  return out;
}

std::vector<std::vector<int64_t>> split_indices(int64_t n, const std::vector<double>& fractions,
                                                uint64_t seed) {
  double sum = 0.0;
  for (double f : fractions) {
    if (f < 0.0) throw ConfigError("negative split fraction");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("split fractions must sum to 1");

  std::vector<int64_t> order(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
  Rng rng(seed);
  for (int64_t i = n - 1; i > 0; --i) {
    std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(rng.uniform_int(i + 1))]);
  }

  // largest-remainder apportionment
  const size_t k = fractions.size();
  std::vector<int64_t> sizes(k);
  std::vector<std::pair<double, size_t>> rema(k);
  int64_t assigned = 0;
  for (size_t i = 0; i < k; ++i) {
    const double exact = fractions[i] * static_cast<double>(n);
    sizes[i] = static_cast<int64_t>(std::floor(exact));
    rema[i] = {exact - std::floor(exact), i};
    assigned += sizes[i];
  }
  std::stable_sort(rema.begin(), rema.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (int64_t r = 0; r < n - assigned; ++r) ++sizes[rema[static_cast<size_t>(r) % k].second];

  std::vector<std::vector<int64_t>> out(k);
  int64_t pos = 0;
  for (size_t i = 0; i < k; ++i) {
    out[i].assign(order.begin() + pos, order.begin() + pos + sizes[i]);
    pos += sizes[i];
  }
  return out;
}

}  // namespace speclearn
