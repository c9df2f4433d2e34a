#pragma once

#include <filesystem>

#include "speclearn/model_params.hpp"

namespace speclearn {

inline constexpr uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  uint32_t version = kCheckpointVersion;
  uint64_t preprocessing_digest = 0;
  ModelParams<float> params;  // includes config and trainability mask
};

// Single-file binary: versioned header, preprocessing digest, config block,
// named parameter table with raw little-endian float payloads and the
// trainability mask, and a payload checksum footer. Round-trips bit-exactly.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Digest over backbone tensors only; used to verify the freeze contract.
uint64_t backbone_digest(const ModelParams<float>& params);

}  // namespace speclearn
