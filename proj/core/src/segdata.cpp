#include "speclearn/segdata.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "speclearn/channel.hpp"
#include "speclearn/errors.hpp"
#include "speclearn/sentence.hpp"

namespace speclearn {

using nlohmann::json;

void SegGenConfig::validate() const {
  if (band_sample_rate_hz <= 0.0) throw ConfigError("band sample rate must be positive");
  if (image_size < 8) throw ConfigError("image size too small");
  if (n_subframes < 1) throw ConfigError("n_subframes must be >= 1");
  if (!(burst_duty > 0.0 && burst_duty <= 1.0)) throw ConfigError("burst_duty must be in (0, 1]");
  spectro.validate();
}

namespace {

double overlap(double a0, double a1, double b0, double b1) {
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

WaveformConfig draw_nr(const SegGenConfig& cfg, Rng& rng) {
  WaveformConfig w;
  w.standard = Standard::NrLike;
  w.bandwidth_hz = (10.0 + 5.0 * static_cast<double>(rng.uniform_int(9))) * 1e6;
  w.scs_hz = rng.uniform_int(2) == 0 ? 15e3 : 30e3;
  w.n_subframes = cfg.n_subframes;
  w.burst_duty = cfg.burst_duty;
  return w;
}

WaveformConfig draw_lte(const SegGenConfig& cfg, Rng& rng) {
  static constexpr double kBwMhz[] = {5.0, 10.0, 15.0, 20.0};
  WaveformConfig w;
  w.standard = Standard::LteLike;
  w.bandwidth_hz = kBwMhz[rng.uniform_int(4)] * 1e6;
  w.scs_hz = 15e3;
  w.n_subframes = cfg.n_subframes;
  w.burst_duty = cfg.burst_duty;
  return w;
}

}  // namespace

LabelImage rasterize_labels(const Spectrogram& spec, const std::vector<SegSignalMeta>& signals) {
  const int64_t rows = spec.rows(), cols = spec.cols();
  LabelImage labels({rows, cols});
  Tensor<double> best_cover({rows, cols});

  for (const auto& sig : signals) {
    const double f_lo = sig.offset_hz - sig.occupied_bw_hz / 2.0;
    const double f_hi = sig.offset_hz + sig.occupied_bw_hz / 2.0;

    std::vector<double> f_cov(static_cast<size_t>(rows));
    for (int64_t r = 0; r < rows; ++r) {
      const double c0 = spec.freq_start_hz + static_cast<double>(r) * spec.hz_per_bin - spec.hz_per_bin / 2.0;
      f_cov[static_cast<size_t>(r)] = overlap(c0, c0 + spec.hz_per_bin, f_lo, f_hi) / spec.hz_per_bin;
    }
    std::vector<double> t_cov(static_cast<size_t>(cols), 0.0);
    for (int64_t c = 0; c < cols; ++c) {
      const double t0 = spec.time_start_s + static_cast<double>(c) * spec.s_per_frame - spec.s_per_frame / 2.0;
      double acc = 0.0;
      for (const auto& b : sig.bursts) acc += overlap(t0, t0 + spec.s_per_frame, b.begin_s, b.end_s);
      t_cov[static_cast<size_t>(c)] = acc / spec.s_per_frame;
    }

    for (int64_t r = 0; r < rows; ++r) {
      if (f_cov[static_cast<size_t>(r)] <= 0.0) continue;
      for (int64_t c = 0; c < cols; ++c) {
        const double cover = f_cov[static_cast<size_t>(r)] * t_cov[static_cast<size_t>(c)];
        if (cover >= 0.5 && cover > best_cover.at(r, c)) {
          best_cover.at(r, c) = cover;
          labels.at(r, c) = sig.label;
        }
      }
    }
  }
  return labels;
}

SegExample make_segmentation_example(const SegGenConfig& cfg, Rng& rng) {
  cfg.validate();
  const double fs = cfg.band_sample_rate_hz;

  WaveformConfig nr, lte;
  int guard = 0;
  do {
    nr = draw_nr(cfg, rng);
    lte = draw_lte(cfg, rng);
    if (++guard > 1000) throw ConfigError("cannot fit two signals into the band");
  } while (nr.bandwidth_hz + lte.bandwidth_hz > 0.9 * fs);

  // random left/right order, random gaps
  const bool nr_left = rng.bernoulli(0.5);
  const double usable = 0.98 * fs;
  const double b_left = nr_left ? nr.bandwidth_hz : lte.bandwidth_hz;
  const double b_right = nr_left ? lte.bandwidth_hz : nr.bandwidth_hz;
  const double free_w = usable - b_left - b_right;
  double u0 = rng.uniform(), u1 = rng.uniform();
  if (u0 > u1) std::swap(u0, u1);
  const double g0 = free_w * u0;
  const double g1 = free_w * (u1 - u0);
  const double left_center = -usable / 2.0 + g0 + b_left / 2.0;
  const double right_center = -usable / 2.0 + g0 + b_left + g1 + b_right / 2.0;
  const double nr_off = nr_left ? left_center : right_center;
  const double lte_off = nr_left ? right_center : left_center;

  BurstSignal nr_sig = generate_ofdm_burst_ex(nr, rng.fork(1).seed(), fs);
  BurstSignal lte_sig = generate_ofdm_burst_ex(lte, rng.fork(2).seed(), fs);
  IQRecording nr_faded = apply_channel(nr_sig.rec, ChannelConfig::default_profile(rng.fork(3).seed(), cfg.doppler_hz));
  IQRecording lte_faded = apply_channel(lte_sig.rec, ChannelConfig::default_profile(rng.fork(4).seed(), cfg.doppler_hz));

  MixturePlacement placement;
  placement.offsets_hz = {nr_off, lte_off};
  placement.bandwidths_hz = {nr.bandwidth_hz, lte.bandwidth_hz};
  placement.band_sample_rate_hz = fs;
  placement.band_center_freq_hz = cfg.band_center_freq_hz;

  IQRecording mix = upconvert_and_mix({nr_faded, lte_faded}, placement);
  mix = scale_to_power_dbm(mix, cfg.signal_total_dbm);

  Rng noise_rng = rng.fork(5);
  const double noise_dbm = sample_noise_power_dbm(cfg.split, noise_rng);
  mix = add_noise(mix, noise_dbm, noise_rng);

  SegExample out;
  out.noise_dbm = noise_dbm;
  out.spec = resize_spectrogram(stft_spectrogram(mix, cfg.spectro), cfg.image_size, cfg.image_size);
  out.signals = {
      {1, nr_off, nr_sig.occupied_bw_hz, nr.bandwidth_hz, nr.scs_hz, nr_sig.bursts},
      {2, lte_off, lte_sig.occupied_bw_hz, lte.bandwidth_hz, lte.scs_hz, lte_sig.bursts},
  };
  out.labels = rasterize_labels(out.spec, out.signals);
  return out;
}

void write_seg_dataset(const std::filesystem::path& dir, const SegGenConfig& cfg,
                       const std::vector<SegExample>& examples, uint64_t seed) {
  std::filesystem::create_directories(dir);
  json entries = json::array();
  for (size_t k = 0; k < examples.size(); ++k) {
    const auto& ex = examples[k];
    const std::string spec_name = "ex_" + std::to_string(k) + ".spec";
    const std::string lab_name = "ex_" + std::to_string(k) + ".lab";
    {
      std::ofstream f(dir / spec_name, std::ios::binary);
      if (!f) throw FormatError("cannot write " + spec_name);
      f.write(reinterpret_cast<const char*>(ex.spec.values.data()),
              static_cast<std::streamsize>(ex.spec.values.size() * 4));
    }
    {
      std::ofstream f(dir / lab_name, std::ios::binary);
      if (!f) throw FormatError("cannot write " + lab_name);
      f.write(reinterpret_cast<const char*>(ex.labels.data()),
              static_cast<std::streamsize>(ex.labels.size()));
    }
    entries.push_back(json{{"spec", spec_name}, {"lab", lab_name}, {"noise_dbm", ex.noise_dbm}});
  }

  const SentenceConfig sc{cfg.image_size, 16};
  json manifest{
      {"format_version", 1},
      {"split", cfg.split == Split::Train ? "train" : "test"},
      {"seed", seed},
      {"noise_distribution", cfg.split == Split::Train ? "normal(-70,5) dBm" : "uniform(-90,-20) dBm"},
      {"count", examples.size()},
      {"image_size", cfg.image_size},
      {"band_sample_rate_hz", cfg.band_sample_rate_hz},
      {"spectro",
       json{{"fft_size", cfg.spectro.fft_size},
            {"window", "hann"},
            {"window_size", cfg.spectro.window_size},
            {"hop_size", cfg.spectro.hop_size},
            {"log_floor_db", cfg.spectro.log_floor_db}}},
      {"preprocessing_digest", preprocessing_digest(cfg.spectro, sc)},
      {"entries", entries}};
  std::ofstream mf(dir / "manifest.json");
  if (!mf) throw FormatError("cannot write dataset manifest");
  mf << manifest.dump(2) << "\n";
}

SegDataset SegDataset::load(const std::filesystem::path& dir) {
  std::ifstream mf(dir / "manifest.json");
  if (!mf) throw FormatError("missing dataset manifest in " + dir.string());
  json manifest;
  try {
    mf >> manifest;
  } catch (const json::exception& e) {
    throw FormatError("bad dataset manifest: " + std::string(e.what()));
  }

  SegDataset ds;
  ds.split = manifest.at("split").get<std::string>() == "train" ? Split::Train : Split::Test;
  ds.seed = manifest.at("seed").get<uint64_t>();
  ds.preprocessing_digest = manifest.at("preprocessing_digest").get<uint64_t>();
  ds.image_size = manifest.at("image_size").get<int64_t>();
  const auto& sj = manifest.at("spectro");
  ds.spectro.fft_size = sj.at("fft_size").get<int>();
  ds.spectro.window_size = sj.at("window_size").get<int>();
  ds.spectro.hop_size = sj.at("hop_size").get<int>();
  ds.spectro.log_floor_db = sj.at("log_floor_db").get<double>();

  const int64_t n = ds.image_size;
  for (const auto& e : manifest.at("entries")) {
    {
      std::ifstream f(dir / e.at("spec").get<std::string>(), std::ios::binary | std::ios::ate);
      if (!f) throw FormatError("missing spectrogram file");
      Tensor<float> t({n, n});
      if (static_cast<int64_t>(f.tellg()) != t.size() * 4) throw FormatError("bad .spec size");
      f.seekg(0);
      f.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(t.size() * 4));
      ds.specs.push_back(std::move(t));
    }
    {
      std::ifstream f(dir / e.at("lab").get<std::string>(), std::ios::binary | std::ios::ate);
      if (!f) throw FormatError("missing label file");
      LabelImage t({n, n});
      if (static_cast<int64_t>(f.tellg()) != t.size()) throw FormatError("bad .lab size");
      f.seekg(0);
      f.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(t.size()));
      ds.labels.push_back(std::move(t));
    }
    ds.noise_dbm.push_back(e.at("noise_dbm").get<double>());
  }
  return ds;
}

}  // namespace speclearn
