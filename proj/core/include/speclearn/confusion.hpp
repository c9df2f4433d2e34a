#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "speclearn/segdata.hpp"
#include "speclearn/tensor.hpp"

namespace speclearn {

// Row = true class, column = predicted class.
class ConfusionMatrix {
 public:
  ConfusionMatrix(int n_classes, std::vector<std::string> class_names = {});

  void add(const LabelImage& truth, const LabelImage& pred);
  void add_pixel(int64_t true_class, int64_t pred_class);
  void add_count(int64_t true_class, int64_t pred_class, int64_t n);

  int classes() const { return k_; }
  int64_t at(int64_t true_class, int64_t pred_class) const;
  int64_t total() const;
  int64_t row_sum(int64_t true_class) const;
  // Row-normalized rates; rows with no pixels stay zero.
  Tensor<double> row_normalized() const;
  double recall(int64_t true_class) const;  // diagonal / row sum

  // Collapse all signal classes (1..K-1) into one: {noise, signal}.
  ConfusionMatrix merged_binary() const;

  const std::vector<std::string>& names() const { return names_; }

 private:
  int k_;
  std::vector<std::string> names_;
  std::vector<int64_t> counts_;
};

// 0 stays 0; every other class becomes 1.
LabelImage merge_to_binary(const LabelImage& labels);

// Deterministic shuffled partition of [0, n) into |fractions| disjoint
// groups sized by largest-remainder apportionment. Fractions must sum to 1.
std::vector<std::vector<int64_t>> split_indices(int64_t n, const std::vector<double>& fractions,
                                                uint64_t seed);

}  // namespace speclearn
