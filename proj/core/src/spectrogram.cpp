#include "speclearn/spectrogram.hpp"

#include <cmath>
#include <cstring>

#include "speclearn/errors.hpp"
#include "speclearn/fft.hpp"

namespace speclearn {

void SpectroParams::validate() const {
  if (fft_size < 1 || window_size < 1) throw ConfigError("fft/window size must be positive");
  if (window_size > fft_size) throw ConfigError("window_size must not exceed fft_size");
  if (hop_size < 1) throw ConfigError("hop_size must be >= 1");
}

double SpectroParams::linear_floor() const { return std::pow(10.0, log_floor_db / 10.0); }

std::vector<IQRecording> slice_recording(const IQRecording& iq, double slice_ms) {
  if (slice_ms <= 0.0) throw ConfigError("slice duration must be positive");
  const auto slice_samples = static_cast<int64_t>(std::llround(slice_ms * 1e-3 * iq.sample_rate_hz));
  if (slice_samples < 1 || static_cast<int64_t>(iq.samples.size()) < slice_samples) {
    throw DataError("recording shorter than one slice");
  }
  const int64_t n_slices = static_cast<int64_t>(iq.samples.size()) / slice_samples;
  std::vector<IQRecording> out;
  out.reserve(static_cast<size_t>(n_slices));
  for (int64_t k = 0; k < n_slices; ++k) {
    IQRecording s;
    s.sample_rate_hz = iq.sample_rate_hz;
    s.center_freq_hz = iq.center_freq_hz;
    s.samples.assign(iq.samples.begin() + k * slice_samples,
                     iq.samples.begin() + (k + 1) * slice_samples);
    out.push_back(std::move(s));
  }
  return out;
}

int64_t stft_frame_count(int64_t n_samples, int window_size, int hop_size) {
  if (n_samples < window_size) return 0;
  return (n_samples - window_size) / hop_size + 1;
}

Spectrogram stft_spectrogram(const IQRecording& iq, const SpectroParams& p) {
  p.validate();
  const auto n = static_cast<int64_t>(iq.samples.size());
  const int64_t frames = stft_frame_count(n, p.window_size, p.hop_size);
  if (frames < 1) throw DataError("recording shorter than one STFT window");

  std::vector<double> win(static_cast<size_t>(p.window_size));
  for (int i = 0; i < p.window_size; ++i) {
    win[static_cast<size_t>(i)] =
        0.5 * (1.0 - std::cos(2.0 * M_PI * static_cast<double>(i) / p.window_size));
  }

  const int64_t bins = p.fft_size;
  Spectrogram out;
  out.values = Tensor<float>({bins, frames});
  out.hz_per_bin = iq.sample_rate_hz / static_cast<double>(p.fft_size);
  out.freq_start_hz = -iq.sample_rate_hz / 2.0;
  out.s_per_frame = static_cast<double>(p.hop_size) / iq.sample_rate_hz;
  out.time_start_s = 0.5 * static_cast<double>(p.window_size) / iq.sample_rate_hz;

  const double floor_lin = p.linear_floor();
  std::vector<std::complex<double>> buf(static_cast<size_t>(p.fft_size));
  for (int64_t f = 0; f < frames; ++f) {
    std::fill(buf.begin(), buf.end(), std::complex<double>(0.0, 0.0));
    const int64_t off = f * p.hop_size;
    for (int i = 0; i < p.window_size; ++i) {
      buf[static_cast<size_t>(i)] =
          std::complex<double>(iq.samples[static_cast<size_t>(off + i)]) * win[static_cast<size_t>(i)];
    }
    fft_inplace(buf, false);
    // shift so row 0 is -fs/2
    for (int64_t k = 0; k < bins; ++k) {
      const auto src = static_cast<size_t>((k + bins / 2) % bins);
      const double power = std::norm(buf[src]);
      out.values.at(k, f) = static_cast<float>(10.0 * std::log10(power + floor_lin));
    }
  }
  return out;
}

Tensor<float> resize_image(const Tensor<float>& img, int64_t out_h, int64_t out_w) {
  if (img.rank() != 2 || img.size() == 0) throw DimensionError("resize needs a nonempty 2-D input");
  if (out_h < 1 || out_w < 1) throw DimensionError("resize target must be positive");
  const int64_t h = img.dim(0), w = img.dim(1);
  if (h == out_h && w == out_w) return img;

  Tensor<float> out({out_h, out_w});
  const double sy = out_h > 1 ? static_cast<double>(h - 1) / static_cast<double>(out_h - 1) : 0.0;
  const double sx = out_w > 1 ? static_cast<double>(w - 1) / static_cast<double>(out_w - 1) : 0.0;
  for (int64_t r = 0; r < out_h; ++r) {
    const double fy = static_cast<double>(r) * sy;
    const int64_t y0 = std::min<int64_t>(static_cast<int64_t>(fy), h - 1);
    const int64_t y1 = std::min<int64_t>(y0 + 1, h - 1);
    const double wy = fy - static_cast<double>(y0);
    for (int64_t c = 0; c < out_w; ++c) {
      const double fx = static_cast<double>(c) * sx;
      const int64_t x0 = std::min<int64_t>(static_cast<int64_t>(fx), w - 1);
      const int64_t x1 = std::min<int64_t>(x0 + 1, w - 1);
      const double wx = fx - static_cast<double>(x0);
      const double top = (1.0 - wx) * img.at(y0, x0) + wx * img.at(y0, x1);
      const double bot = (1.0 - wx) * img.at(y1, x0) + wx * img.at(y1, x1);
      out.at(r, c) = static_cast<float>((1.0 - wy) * top + wy * bot);
    }
  }
  return out;
}

Spectrogram resize_spectrogram(const Spectrogram& s, int64_t out_h, int64_t out_w) {
  Spectrogram out;
  out.values = resize_image(s.values, out_h, out_w);
  const double fy = out_h > 1 ? static_cast<double>(s.rows() - 1) / static_cast<double>(out_h - 1) : 0.0;
  const double fx = out_w > 1 ? static_cast<double>(s.cols() - 1) / static_cast<double>(out_w - 1) : 0.0;
  out.freq_start_hz = s.freq_start_hz;
  out.hz_per_bin = s.hz_per_bin * (out_h > 1 ? fy : static_cast<double>(s.rows()));
  out.time_start_s = s.time_start_s;
  out.s_per_frame = s.s_per_frame * (out_w > 1 ? fx : static_cast<double>(s.cols()));
  return out;
}

Spectrogram concat_time(const std::vector<Spectrogram>& parts) {
  if (parts.empty()) throw DataError("nothing to concatenate");
  const int64_t rows = parts.front().rows();
  int64_t cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) throw DimensionError("row mismatch in time concatenation");
    cols += p.cols();
  }
  Spectrogram out;
  out.values = Tensor<float>({rows, cols});
  out.freq_start_hz = parts.front().freq_start_hz;
  out.hz_per_bin = parts.front().hz_per_bin;
  out.time_start_s = parts.front().time_start_s;
  out.s_per_frame = parts.front().s_per_frame;
  int64_t off = 0;
  for (const auto& p : parts) {
    for (int64_t r = 0; r < rows; ++r) {
      std::memcpy(&out.values.at(r, off), &p.values.at(r, 0),
                  static_cast<size_t>(p.cols()) * sizeof(float));
    }
    off += p.cols();
  }
  return out;
}

}  // namespace speclearn
