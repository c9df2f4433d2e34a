#pragma once

#include <vector>

#include "speclearn/iq.hpp"
#include "speclearn/tensor.hpp"

namespace speclearn {

enum class WindowKind { Hann };

struct SpectroParams {
  int fft_size = 1024;
  WindowKind window = WindowKind::Hann;
  int window_size = 512;
  int hop_size = 512;
  double log_floor_db = -120.0;  // linear power clamp before the log

  void validate() const;
  double linear_floor() const;
};

// Log-power time-frequency image. Rows are frequency (row 0 at -fs/2 after
// the shift), columns are time frames. Axis metadata maps pixel centers to
// physical units and survives resizing.
struct Spectrogram {
  Tensor<float> values;  // (freq_bins, time_frames), dB
  double freq_start_hz = 0.0;  // center frequency of row 0 (baseband-relative)
  double hz_per_bin = 0.0;
  double time_start_s = 0.0;  // center time of column 0
  double s_per_frame = 0.0;

  int64_t rows() const { return values.rank() == 2 ? values.dim(0) : 0; }
  int64_t cols() const { return values.rank() == 2 ? values.dim(1) : 0; }

  double freq_span_hz() const { return hz_per_bin * static_cast<double>(rows()); }
  double time_span_s() const { return s_per_frame * static_cast<double>(cols()); }
};

// Non-overlapping slices of exactly slice_ms each; remainder discarded.
std::vector<IQRecording> slice_recording(const IQRecording& iq, double slice_ms = 2.0);

int64_t stft_frame_count(int64_t n_samples, int window_size, int hop_size);

Spectrogram stft_spectrogram(const IQRecording& iq, const SpectroParams& p);

// Bilinear, corner-aligned. Same-size input is returned unchanged.
Tensor<float> resize_image(const Tensor<float>& img, int64_t out_h, int64_t out_w);

Spectrogram resize_spectrogram(const Spectrogram& s, int64_t out_h, int64_t out_w);

// Concatenate along the time axis; inputs must agree in rows and axis scale.
Spectrogram concat_time(const std::vector<Spectrogram>& parts);

}  // namespace speclearn
