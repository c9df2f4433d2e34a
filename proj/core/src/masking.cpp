#include "speclearn/masking.hpp"

#include <cfenv>
#include <cmath>

#include "speclearn/errors.hpp"

namespace speclearn {

int64_t mask_count(double ratio, int64_t t_tokens) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw ConfigError("mask ratio must be in (0, 1]");
  // nearbyint under the default rounding mode is round-half-to-even
  const auto k = static_cast<int64_t>(std::nearbyint(ratio * static_cast<double>(t_tokens)));
  return std::min(t_tokens, std::max<int64_t>(1, k));
}

MaskedSentence random_mask(const SentenceTokens& sentence, double ratio, Rng& rng) {
  const int64_t t_tokens = sentence.t_tokens();
  const int64_t k = mask_count(ratio, t_tokens);

  // partial Fisher-Yates for k indices without replacement
  std::vector<int64_t> order(static_cast<size_t>(t_tokens));
  for (int64_t i = 0; i < t_tokens; ++i) order[static_cast<size_t>(i)] = i;
  for (int64_t i = 0; i < k; ++i) {
    const int64_t j = i + rng.uniform_int(t_tokens - i);
    std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);
  }

  // token fill statistics come from the sentence itself
  double mean = 0.0;
  const auto n = sentence.tokens.size();
  for (int64_t i = 0; i < n; ++i) mean += sentence.tokens[i];
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    const double d = sentence.tokens[i] - mean;
    var += d * d;
  }
  const double sd = std::sqrt(var / static_cast<double>(n));

  MaskedSentence out{sentence, TokenMask(static_cast<size_t>(t_tokens), 0)};
  const int64_t token_elems = sentence.f_bins() * sentence.width();
  for (int64_t i = 0; i < k; ++i) {
    const int64_t t = order[static_cast<size_t>(i)];
    out.mask[static_cast<size_t>(t)] = 1;
    float* dst = out.sentence.tokens.data() + t * token_elems;
    for (int64_t j = 0; j < token_elems; ++j) {
      dst[j] = static_cast<float>(rng.normal(mean, sd));
    }
  }
  return out;
}

}  // namespace speclearn
