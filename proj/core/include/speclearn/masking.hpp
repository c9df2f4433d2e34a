#pragma once

#include <cstdint>
#include <vector>

#include "speclearn/rng.hpp"
#include "speclearn/sentence.hpp"

namespace speclearn {

// Per-token mask flags for one sentence.
using TokenMask = std::vector<uint8_t>;

// Number of masked tokens: max(1, round(ratio * T)), round half to even.
int64_t mask_count(double ratio, int64_t t_tokens);

struct MaskedSentence {
  SentenceTokens sentence;  // masked copy
  TokenMask mask;           // 1 where masked
};

// Replaces `mask_count` uniformly chosen tokens with Gaussian noise matching
// the sentence's own mean and std; unmasked tokens are untouched.
MaskedSentence random_mask(const SentenceTokens& sentence, double ratio, Rng& rng);

}  // namespace speclearn
