#pragma once

#include <cstdint>
#include <vector>

#include "speclearn/iq.hpp"

namespace speclearn {

enum class Standard { NrLike, LteLike };

// Simplified OFDM transmission: QPSK payload on 90% of the nominal
// bandwidth, 7% cyclic prefix, duty-cycled bursts of whole OFDM symbols.
struct WaveformConfig {
  Standard standard = Standard::NrLike;
  double bandwidth_hz = 10e6;
  double scs_hz = 15e3;  // subcarrier spacing; LTE-like is fixed at 15 kHz
  int n_subframes = 40;  // 1 ms each
  double burst_duty = 0.7;
  int max_bursts = 4;  // active symbols split into at most this many runs

  void validate() const;
  int occupied_subcarriers() const;  // floor(0.9 * bandwidth / scs)
  double occupied_bandwidth_hz() const { return occupied_subcarriers() * scs_hz; }
  // Smallest power-of-two-FFT rate that covers the bandwidth.
  double natural_sample_rate_hz() const;
};

struct TimeInterval {
  double begin_s = 0.0;
  double end_s = 0.0;
  double length_s() const { return end_s - begin_s; }
};

// Generated burst plus the ground-truth footprint needed for labeling.
struct BurstSignal {
  IQRecording rec;
  std::vector<TimeInterval> bursts;  // merged active spans, ascending
  double occupied_bw_hz = 0.0;
};

// sample_rate_hz == 0 picks the natural rate. A nonzero rate must be an
// integer power-of-two multiple of the subcarrier spacing that covers the
// occupied band.
BurstSignal generate_ofdm_burst_ex(const WaveformConfig& cfg, uint64_t seed,
                                   double sample_rate_hz = 0.0);

IQRecording generate_ofdm_burst(const WaveformConfig& cfg, uint64_t seed);

}  // namespace speclearn
