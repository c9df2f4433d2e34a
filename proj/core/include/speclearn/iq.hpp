#pragma once

#include <complex>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace speclearn {

// Complex baseband sample stream. |sample|^2 is instantaneous power in
// watts, so 0 dBm corresponds to a mean square of 1e-3.
struct IQRecording {
  std::vector<std::complex<float>> samples;
  double sample_rate_hz = 0.0;
  double center_freq_hz = 0.0;

  double duration_s() const {
    return sample_rate_hz > 0.0 ? static_cast<double>(samples.size()) / sample_rate_hz : 0.0;
  }

  double mean_power_w() const;
};

// Raw interleaved I,Q little-endian float32 in <name>.iq plus a sidecar
// <name>.meta with `key=value` lines (sample_rate_hz, center_freq_hz,
// optional capture_time).
void save_iq_recording(const IQRecording& rec, const std::filesystem::path& iq_path,
                       const std::optional<std::string>& capture_time = std::nullopt);

IQRecording load_iq_recording(const std::filesystem::path& iq_path);

}  // namespace speclearn
