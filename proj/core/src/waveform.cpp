#include "speclearn/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "speclearn/errors.hpp"
#include "speclearn/fft.hpp"
#include "speclearn/rng.hpp"

namespace speclearn {

namespace {

constexpr double kCyclicPrefixFraction = 0.07;

bool near(double a, double b) { return std::abs(a - b) < 1e-3; }

bool bandwidth_allowed(Standard std_, double bw) {
  if (std_ == Standard::NrLike) {
    for (double mhz = 10.0; mhz <= 50.0; mhz += 5.0) {
      if (near(bw, mhz * 1e6)) return true;
    }
    return false;
  }
  for (double mhz : {5.0, 10.0, 15.0, 20.0}) {
    if (near(bw, mhz * 1e6)) return true;
  }
  return false;
}

}  // namespace

void WaveformConfig::validate() const {
  if (!bandwidth_allowed(standard, bandwidth_hz)) {
    throw ConfigError("bandwidth " + std::to_string(bandwidth_hz / 1e6) +
                      " MHz not in the allowed set for this standard");
  }
  if (standard == Standard::NrLike) {
    if (!near(scs_hz, 15e3) && !near(scs_hz, 30e3)) {
      throw ConfigError("NR-like subcarrier spacing must be 15 or 30 kHz");
    }
  } else if (!near(scs_hz, 15e3)) {
    throw ConfigError("LTE-like subcarrier spacing is fixed at 15 kHz");
  }
  if (n_subframes < 1) throw ConfigError("n_subframes must be >= 1");
  if (!(burst_duty > 0.0 && burst_duty <= 1.0)) {
    throw ConfigError("burst_duty must lie in (0, 1]");
  }
  if (max_bursts < 1) throw ConfigError("max_bursts must be >= 1");
  if (occupied_subcarriers() < 1) throw ConfigError("no occupied subcarriers");
}

int WaveformConfig::occupied_subcarriers() const {
  return static_cast<int>(std::floor(0.9 * bandwidth_hz / scs_hz));
}

double WaveformConfig::natural_sample_rate_hz() const {
  size_t fft = 1;
  while (static_cast<double>(fft) * scs_hz < bandwidth_hz) fft <<= 1;
  return static_cast<double>(fft) * scs_hz;
}

BurstSignal generate_ofdm_burst_ex(const WaveformConfig& cfg, uint64_t seed,
                                   double sample_rate_hz) {
  cfg.validate();
  const double fs = sample_rate_hz > 0.0 ? sample_rate_hz : cfg.natural_sample_rate_hz();
  if (fs < cfg.bandwidth_hz) throw ConfigError("sample rate below signal bandwidth");

  const double fft_f = fs / cfg.scs_hz;
  const auto fft_n = static_cast<size_t>(std::llround(fft_f));
  if (std::abs(fft_f - static_cast<double>(fft_n)) > 1e-6 || !is_pow2(fft_n)) {
    throw ConfigError("sample rate must be a power-of-two multiple of the subcarrier spacing");
  }
  const int n_occ = cfg.occupied_subcarriers();
  if (static_cast<size_t>(n_occ) > fft_n) throw ConfigError("occupied band exceeds FFT span");

  const double sf_samples_f = 1e-3 * fs;
  const auto sf_samples = static_cast<int64_t>(std::llround(sf_samples_f));
  if (std::abs(sf_samples_f - static_cast<double>(sf_samples)) > 1e-6) {
    throw ConfigError("sample rate must give a whole number of samples per subframe");
  }

  const auto cp = static_cast<int64_t>(std::llround(kCyclicPrefixFraction * static_cast<double>(fft_n)));
  const int64_t sym_len = static_cast<int64_t>(fft_n) + cp;
  const int64_t syms_per_sf = sf_samples / sym_len;
  if (syms_per_sf < 1) throw ConfigError("subframe shorter than one OFDM symbol");
  // Whatever the symbol grid does not cover extends the first cyclic prefix,
  // keeping every subframe exactly 1 ms.
  const int64_t leftover = sf_samples - syms_per_sf * sym_len;
  const int64_t total_syms = syms_per_sf * cfg.n_subframes;

  Rng rng(seed);

  // Duty cycle as whole OFDM symbols: an exact active count split into a few
  // contiguous runs placed with random gaps.
  const int64_t active = std::clamp<int64_t>(std::llround(cfg.burst_duty * static_cast<double>(total_syms)),
                                             1, total_syms);
  const int64_t free_syms = total_syms - active;
  const auto n_runs =
      static_cast<int64_t>(1 + rng.uniform_int(std::min<int64_t>(cfg.max_bursts, active)));

  std::vector<int64_t> run_len;
  if (n_runs == 1) {
    run_len.push_back(active);
  } else {
    std::set<int64_t> cuts;
    while (static_cast<int64_t>(cuts.size()) < n_runs - 1) {
      cuts.insert(1 + rng.uniform_int(active - 1));
    }
    int64_t prev = 0;
    for (int64_t c : cuts) {
      run_len.push_back(c - prev);
      prev = c;
    }
    run_len.push_back(active - prev);
  }
  std::vector<int64_t> gap(static_cast<size_t>(n_runs) + 1, 0);
  {
    std::vector<int64_t> cuts;
    for (int64_t i = 0; i < n_runs; ++i) cuts.push_back(rng.uniform_int(free_syms + 1));
    std::sort(cuts.begin(), cuts.end());
    int64_t prev = 0;
    for (size_t i = 0; i < cuts.size(); ++i) {
      gap[i] = cuts[i] - prev;
      prev = cuts[i];
    }
    gap.back() = free_syms - prev;
  }

  std::vector<uint8_t> sym_active(static_cast<size_t>(total_syms), 0);
  {
    int64_t pos = 0;
    for (size_t r = 0; r < run_len.size(); ++r) {
      pos += gap[r];
      for (int64_t s = 0; s < run_len[r]; ++s) sym_active[static_cast<size_t>(pos + s)] = 1;
      pos += run_len[r];
    }
  }

  const auto sym_begin_sample = [&](int64_t s) {
    const int64_t m = s / syms_per_sf;
    const int64_t k = s % syms_per_sf;
    return m * sf_samples + (k == 0 ? 0 : leftover + k * sym_len);
  };
  const auto sym_end_sample = [&](int64_t s) {
    const int64_t k = s % syms_per_sf;
    return sym_begin_sample(s) + sym_len + (k == 0 ? leftover : 0);
  };

  BurstSignal out;
  out.occupied_bw_hz = cfg.occupied_bandwidth_hz();
  out.rec.sample_rate_hz = fs;
  out.rec.center_freq_hz = 0.0;
  out.rec.samples.assign(static_cast<size_t>(sf_samples * cfg.n_subframes), {0.0f, 0.0f});

  const double qpsk_amp = 1.0 / std::sqrt(2.0 * n_occ);  // unit mean symbol power
  std::vector<std::complex<double>> freq(fft_n);
  for (int64_t s = 0; s < total_syms; ++s) {
    if (!sym_active[static_cast<size_t>(s)]) continue;
    std::fill(freq.begin(), freq.end(), std::complex<double>(0.0, 0.0));
    for (int b = 0; b < n_occ; ++b) {
      const int sc = b - n_occ / 2;
      const size_t idx = static_cast<size_t>((sc + static_cast<int>(fft_n)) % static_cast<int>(fft_n));
      const double re = rng.bernoulli(0.5) ? qpsk_amp : -qpsk_amp;
      const double im = rng.bernoulli(0.5) ? qpsk_amp : -qpsk_amp;
      freq[idx] = {re, im};
    }
    std::vector<std::complex<double>> td = ifft(freq);
    for (auto& v : td) v *= static_cast<double>(fft_n);  // unnormalized inverse transform

    const int64_t begin = sym_begin_sample(s);
    const int64_t end = sym_end_sample(s);
    const int64_t this_cp = end - begin - static_cast<int64_t>(fft_n);
    for (int64_t i = 0; i < end - begin; ++i) {
      // cyclic prefix: the tail of the symbol precedes it
      const int64_t n = static_cast<int64_t>(fft_n);
      const size_t src = static_cast<size_t>(((i - this_cp) % n + n) % n);
      out.rec.samples[static_cast<size_t>(begin + i)] =
          std::complex<float>(static_cast<float>(td[src].real()), static_cast<float>(td[src].imag()));
    }
  }

  // merge contiguous active symbols into intervals
  int64_t run_start = -1;
  for (int64_t s = 0; s <= total_syms; ++s) {
    const bool on = s < total_syms && sym_active[static_cast<size_t>(s)];
    if (on && run_start < 0) run_start = s;
    if (!on && run_start >= 0) {
      out.bursts.push_back({static_cast<double>(sym_begin_sample(run_start)) / fs,
                            static_cast<double>(sym_end_sample(s - 1)) / fs});
      run_start = -1;
    }
  }
  return out;
}

IQRecording generate_ofdm_burst(const WaveformConfig& cfg, uint64_t seed) {
  return generate_ofdm_burst_ex(cfg, seed).rec;
}

}  // namespace speclearn
