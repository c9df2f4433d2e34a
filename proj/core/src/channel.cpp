#include "speclearn/channel.hpp"

#include <cmath>
#include <complex>

#include "speclearn/errors.hpp"
#include "speclearn/rng.hpp"

namespace speclearn {

void ChannelConfig::validate() const {
  if (taps.empty()) throw ConfigError("channel needs at least one tap");
  for (size_t i = 1; i < taps.size(); ++i) {
    if (taps[i].delay_s < taps[i - 1].delay_s) {
      throw ConfigError("tap delays must be nondecreasing");
    }
  }
  if (taps.front().delay_s < 0.0) throw ConfigError("negative tap delay");
  if (doppler_hz < 0.0) throw ConfigError("negative doppler");
}

ChannelConfig ChannelConfig::default_profile(uint64_t seed, double doppler_hz) {
  ChannelConfig ch;
  ch.taps = {{0.0, 0.0}, {0.5e-6, -3.0}, {1.0e-6, -6.0}};
  ch.doppler_hz = doppler_hz;
  ch.seed = seed;
  ch.fading = FadingMode::RayleighBlock;
  return ch;
}

IQRecording apply_channel(const IQRecording& sig, const ChannelConfig& ch) {
  ch.validate();
  const double dur = sig.duration_s();
  for (const auto& t : ch.taps) {
    if (t.delay_s >= dur) throw ConfigError("tap delay exceeds recording duration");
  }

  const size_t n_taps = ch.taps.size();
  std::vector<double> p(n_taps);
  double total = 0.0;
  for (size_t k = 0; k < n_taps; ++k) {
    p[k] = std::pow(10.0, ch.taps[k].power_db / 10.0);
    total += p[k];
  }
  for (auto& v : p) v /= total;

  Rng rng(ch.seed);
  std::vector<std::complex<double>> gain(n_taps);
  std::vector<double> rot_hz(n_taps, 0.0);
  for (size_t k = 0; k < n_taps; ++k) {
    gain[k] = ch.fading == FadingMode::RayleighBlock ? rng.cnormal(p[k])
                                                     : std::complex<double>(std::sqrt(p[k]), 0.0);
    if (ch.doppler_hz > 0.0) rot_hz[k] = ch.doppler_hz * rng.uniform(-1.0, 1.0);
  }

  const double fs = sig.sample_rate_hz;
  std::vector<int64_t> delay(n_taps);
  for (size_t k = 0; k < n_taps; ++k) delay[k] = std::llround(ch.taps[k].delay_s * fs);

  IQRecording out;
  out.sample_rate_hz = sig.sample_rate_hz;
  out.center_freq_hz = sig.center_freq_hz;
  const auto n = static_cast<int64_t>(sig.samples.size());
  out.samples.assign(sig.samples.size(), {0.0f, 0.0f});

  for (size_t k = 0; k < n_taps; ++k) {
    const std::complex<double> g = gain[k];
    const int64_t d = delay[k];
    if (rot_hz[k] == 0.0) {
      for (int64_t i = d; i < n; ++i) {
        const std::complex<double> x(sig.samples[static_cast<size_t>(i - d)]);
        const std::complex<double> y = g * x;
        auto& o = out.samples[static_cast<size_t>(i)];
        o += std::complex<float>(static_cast<float>(y.real()), static_cast<float>(y.imag()));
      }
    } else {
      const double w = 2.0 * M_PI * rot_hz[k] / fs;
      for (int64_t i = d; i < n; ++i) {
        const std::complex<double> x(sig.samples[static_cast<size_t>(i - d)]);
        const std::complex<double> rot(std::cos(w * static_cast<double>(i)),
                                       std::sin(w * static_cast<double>(i)));
        const std::complex<double> y = g * rot * x;
        auto& o = out.samples[static_cast<size_t>(i)];
        o += std::complex<float>(static_cast<float>(y.real()), static_cast<float>(y.imag()));
      }
    }
  }
  return out;
}

}  // namespace speclearn
