#pragma once

#include <cstdint>
#include <vector>

#include "speclearn/iq.hpp"

namespace speclearn {

struct ChannelTap {
  double delay_s = 0.0;
  double power_db = 0.0;
};

// Static: tap gains are sqrt of the normalized linear power (an identity
// channel for one 0 dB tap). RayleighBlock: complex Gaussian gains drawn
// once per call from the config seed.
enum class FadingMode { Static, RayleighBlock };

struct ChannelConfig {
  std::vector<ChannelTap> taps{{0.0, 0.0}};
  double doppler_hz = 0.0;  // slow per-tap phase rotation
  uint64_t seed = 0;
  FadingMode fading = FadingMode::Static;

  void validate() const;

  // 3-tap exponential-decay profile (0, 0.5, 1.0 us at 0, -3, -6 dB) with
  // Rayleigh gains; the stand-in fading channel for mixture generation.
  static ChannelConfig default_profile(uint64_t seed, double doppler_hz = 30.0);
};

// Tapped delay line. Tap powers are normalized so the expected output power
// equals the input power; output length equals input length.
IQRecording apply_channel(const IQRecording& sig, const ChannelConfig& ch);

}  // namespace speclearn
