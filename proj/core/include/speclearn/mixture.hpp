#pragma once

#include <vector>

#include "speclearn/iq.hpp"
#include "speclearn/rng.hpp"

namespace speclearn {

enum class Split { Train, Test };

// Frequency plan for mixing signals into one analysis band. offsets_hz and
// bandwidths_hz are per signal, index-aligned with the signal list.
struct MixturePlacement {
  std::vector<double> offsets_hz;
  std::vector<double> bandwidths_hz;
  double band_sample_rate_hz = 61.44e6;
  double band_center_freq_hz = 4e9;

  void validate() const;  // containment and pairwise disjointness
};

// Shift each signal to its offset and sum. All signals must already be at
// the band sample rate.
IQRecording upconvert_and_mix(const std::vector<IQRecording>& signals,
                              const MixturePlacement& placement);

// Train: Normal(-70, 5) dBm. Test: Uniform(-90, -20) dBm.
double sample_noise_power_dbm(Split split, Rng& rng);

double dbm_to_watts(double dbm);

// Adds circularly-symmetric complex Gaussian noise with the given total
// power under the |sample|^2 == watts convention.
IQRecording add_noise(const IQRecording& sig, double power_dbm, Rng& rng);

// Rescales so the mean power equals the given dBm level.
IQRecording scale_to_power_dbm(const IQRecording& sig, double dbm);

}  // namespace speclearn
