#include "speclearn/mixture.hpp"

#include <algorithm>
#include <cmath>

#include "speclearn/errors.hpp"

namespace speclearn {

void MixturePlacement::validate() const {
  if (offsets_hz.size() != bandwidths_hz.size()) {
    throw ConfigError("placement offset/bandwidth count mismatch");
  }
  if (band_sample_rate_hz <= 0.0) throw ConfigError("band sample rate must be positive");
  const double half = band_sample_rate_hz / 2.0;
  const size_t n = offsets_hz.size();
  for (size_t i = 0; i < n; ++i) {
    const double lo = offsets_hz[i] - bandwidths_hz[i] / 2.0;
    const double hi = offsets_hz[i] + bandwidths_hz[i] / 2.0;
    if (!(lo > -half && hi < half)) {
      throw ConfigError("signal " + std::to_string(i) + " extends outside the band");
    }
  }
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      const double lo_i = offsets_hz[i] - bandwidths_hz[i] / 2.0;
      const double hi_i = offsets_hz[i] + bandwidths_hz[i] / 2.0;
      const double lo_j = offsets_hz[j] - bandwidths_hz[j] / 2.0;
      const double hi_j = offsets_hz[j] + bandwidths_hz[j] / 2.0;
      if (std::max(lo_i, lo_j) < std::min(hi_i, hi_j)) {
        throw ConfigError("placements " + std::to_string(i) + " and " + std::to_string(j) +
                          " overlap in frequency");
      }
    }
  }
}

IQRecording upconvert_and_mix(const std::vector<IQRecording>& signals,
                              const MixturePlacement& placement) {
  placement.validate();
  if (signals.size() != placement.offsets_hz.size()) {
    throw ConfigError("signal count does not match placement");
  }

  IQRecording out;
  out.sample_rate_hz = placement.band_sample_rate_hz;
  out.center_freq_hz = placement.band_center_freq_hz;

  size_t max_len = 0;
  for (const auto& s : signals) {
    if (std::abs(s.sample_rate_hz - placement.band_sample_rate_hz) > 1e-3) {
      throw ConfigError("signal not at the band sample rate; resample before mixing");
    }
    max_len = std::max(max_len, s.samples.size());
  }
  out.samples.assign(max_len, {0.0f, 0.0f});

  const double fs = placement.band_sample_rate_hz;
  for (size_t k = 0; k < signals.size(); ++k) {
    const double w = 2.0 * M_PI * placement.offsets_hz[k] / fs;
    const std::complex<double> step(std::cos(w), std::sin(w));
    std::complex<double> phase(1.0, 0.0);
    const auto& in = signals[k].samples;
    for (size_t i = 0; i < in.size(); ++i) {
      const std::complex<double> y = std::complex<double>(in[i]) * phase;
      out.samples[i] += std::complex<float>(static_cast<float>(y.real()), static_cast<float>(y.imag()));
      phase *= step;
      // renormalize the recursive oscillator now and then
      if ((i & 0xFFF) == 0xFFF) phase /= std::abs(phase);
    }
  }
  return out;
}

double sample_noise_power_dbm(Split split, Rng& rng) {
  return split == Split::Train ? rng.normal(-70.0, 5.0) : rng.uniform(-90.0, -20.0);
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

IQRecording add_noise(const IQRecording& sig, double power_dbm, Rng& rng) {
  const double p = dbm_to_watts(power_dbm);
  IQRecording out = sig;
  for (auto& s : out.samples) {
    const std::complex<double> n = rng.cnormal(p);
    s += std::complex<float>(static_cast<float>(n.real()), static_cast<float>(n.imag()));
  }
  return out;
}

IQRecording scale_to_power_dbm(const IQRecording& sig, double dbm) {
  const double cur = sig.mean_power_w();
  if (cur <= 0.0) throw DataError("cannot scale an all-zero recording to a power target");
  const double g = std::sqrt(dbm_to_watts(dbm) / cur);
  IQRecording out = sig;
  for (auto& s : out.samples) {
    s = std::complex<float>(static_cast<float>(s.real() * g), static_cast<float>(s.imag() * g));
  }
  return out;
}

}  // namespace speclearn
