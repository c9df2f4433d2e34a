#include "speclearn/sentence.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "speclearn/digest.hpp"
#include "speclearn/errors.hpp"

namespace speclearn {

using nlohmann::json;

void SentenceConfig::validate() const {
  if (image_size < 1 || tokens < 1) throw ConfigError("sentence geometry must be positive");
  if (image_size % tokens != 0) {
    throw ConfigError("token count must divide the sentence image width");
  }
}

Tensor<float> tokenize_image(const Tensor<float>& image, int64_t t_tokens) {
  if (image.rank() != 2) throw DimensionError("tokenize expects a 2-D image");
  const int64_t f = image.dim(0), wi = image.dim(1);
  if (t_tokens < 1 || wi % t_tokens != 0) throw DimensionError("token count must divide image width");
  const int64_t w = wi / t_tokens;
  Tensor<float> tokens({t_tokens, f, w});
  for (int64_t t = 0; t < t_tokens; ++t) {
    for (int64_t r = 0; r < f; ++r) {
      std::memcpy(&tokens.at(t, r, 0), &image.at(r, t * w), static_cast<size_t>(w) * sizeof(float));
    }
  }
  return tokens;
}

Tensor<float> detokenize(const Tensor<float>& tokens) {
  if (tokens.rank() != 3) throw DimensionError("detokenize expects (T, F, W) tokens");
  const int64_t t_tokens = tokens.dim(0), f = tokens.dim(1), w = tokens.dim(2);
  Tensor<float> image({f, t_tokens * w});
  for (int64_t t = 0; t < t_tokens; ++t) {
    for (int64_t r = 0; r < f; ++r) {
      std::memcpy(&image.at(r, t * w), &tokens.at(t, r, 0), static_cast<size_t>(w) * sizeof(float));
    }
  }
  return image;
}

SentenceTokens build_sentence(const std::vector<Spectrogram>& slices, double duration_ms,
                              const SentenceConfig& cfg, Rng& rng,
                              const std::string& source_id, double slice_ms) {
  cfg.validate();
  const auto needed = static_cast<int64_t>(std::llround(duration_ms / slice_ms));
  if (needed < 1 || static_cast<int64_t>(slices.size()) < needed) {
    throw DataError("not enough slices for a " + std::to_string(duration_ms) + " ms sentence");
  }
  const int64_t start = rng.uniform_int(static_cast<int64_t>(slices.size()) - needed + 1);
  std::vector<Spectrogram> run(slices.begin() + start, slices.begin() + start + needed);
  const Spectrogram sent = concat_time(run);
  const Tensor<float> img = resize_image(sent.values, cfg.image_size, cfg.image_size);

  double mean = 0.0;
  for (int64_t i = 0; i < img.size(); ++i) mean += img[i];
  mean /= static_cast<double>(img.size());
  double var = 0.0;
  for (int64_t i = 0; i < img.size(); ++i) {
    const double d = img[i] - mean;
    var += d * d;
  }
  var /= static_cast<double>(img.size());
  double sd = std::sqrt(var);
  if (sd < 1e-12) sd = 1.0;  // degenerate constant image

  Tensor<float> norm(img.shape());
  for (int64_t i = 0; i < img.size(); ++i) {
    norm[i] = static_cast<float>((img[i] - mean) / sd);
  }

  SentenceTokens out;
  out.tokens = tokenize_image(norm, cfg.tokens);
  out.mean = mean;
  out.stdev = sd;
  out.source_id = source_id;
  out.duration_ms = duration_ms;
  out.band_hz = sent.freq_span_hz();
  return out;
}

uint64_t preprocessing_digest(const SpectroParams& sp, const SentenceConfig& sc) {
  Fnv64 d;
  d.update_str("spectro");
  d.update_i64(sp.fft_size);
  d.update_i64(static_cast<int64_t>(sp.window));
  d.update_i64(sp.window_size);
  d.update_i64(sp.hop_size);
  d.update_f64(sp.log_floor_db);
  d.update_str("sentence");
  d.update_i64(sc.image_size);
  d.update_i64(sc.tokens);
  d.update_str("norm=per_sentence_standardize");
  return d.value();
}

namespace {

json spectro_to_json(const SpectroParams& p) {
  return json{{"fft_size", p.fft_size},
              {"window", "hann"},
              {"window_size", p.window_size},
              {"hop_size", p.hop_size},
              {"log_floor_db", p.log_floor_db}};
}

SpectroParams spectro_from_json(const json& j) {
  SpectroParams p;
  p.fft_size = j.at("fft_size").get<int>();
  p.window_size = j.at("window_size").get<int>();
  p.hop_size = j.at("hop_size").get<int>();
  p.log_floor_db = j.at("log_floor_db").get<double>();
  return p;
}

void write_raw_f32(const std::filesystem::path& path, const Tensor<float>& t) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open for writing: " + path.string());
  f.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.size() * 4));
  if (!f) throw FormatError("short write: " + path.string());
}

Tensor<float> read_raw_f32(const std::filesystem::path& path, std::vector<int64_t> shape) {
  std::ifstream f(path, std::ios::binary | std::ios::ate);
  if (!f) throw FormatError("cannot open: " + path.string());
  Tensor<float> t(std::move(shape));
  if (static_cast<int64_t>(f.tellg()) != t.size() * 4) {
    throw FormatError("unexpected size for " + path.string());
  }
  f.seekg(0);
  f.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(t.size() * 4));
  if (!f) throw FormatError("short read: " + path.string());
  return t;
}

}  // namespace

void build_corpus(const std::vector<std::pair<std::string, IQRecording>>& recordings,
                  const CorpusConfig& cfg, const std::filesystem::path& dir) {
  cfg.sentence.validate();
  cfg.spectro.validate();
  if (recordings.empty()) throw DataError("corpus needs at least one recording");
  if (cfg.n_sentences < 1) throw ConfigError("corpus needs a positive sentence count");

  std::filesystem::create_directories(dir);
  Rng rng(cfg.seed);

  // Durations come from the two-element set {10, 20} ms.
  struct Plan {
    int64_t sentence = 0;
    size_t rec = 0;
    double duration_ms = 0.0;
  };
  std::vector<int64_t> slice_count(recordings.size());
  for (size_t r = 0; r < recordings.size(); ++r) {
    const auto slice_samples =
        static_cast<int64_t>(std::llround(cfg.slice_ms * 1e-3 * recordings[r].second.sample_rate_hz));
    slice_count[r] = slice_samples > 0
                         ? static_cast<int64_t>(recordings[r].second.samples.size()) / slice_samples
                         : 0;
  }

  std::vector<Plan> plans;
  std::vector<Rng> plan_rngs;
  for (int64_t k = 0; k < cfg.n_sentences; ++k) {
    Rng rk = rng.fork(static_cast<uint64_t>(k));
    double duration = rk.uniform_int(2) == 0 ? 10.0 : 20.0;
    auto eligible = [&](double dur) {
      std::vector<size_t> out;
      const auto needed = static_cast<int64_t>(std::llround(dur / cfg.slice_ms));
      for (size_t r = 0; r < recordings.size(); ++r) {
        if (slice_count[r] >= needed) out.push_back(r);
      }
      return out;
    };
    std::vector<size_t> cands = eligible(duration);
    if (cands.empty() && duration == 20.0) {
      duration = 10.0;
      cands = eligible(duration);
    }
    if (cands.empty()) throw DataError("no recording long enough for a sentence");
    const size_t rec = cands[static_cast<size_t>(rk.uniform_int(static_cast<int64_t>(cands.size())))];
    plans.push_back({k, rec, duration});
    plan_rngs.push_back(rk);
  }

  // Group by recording so each recording's slice spectrograms are computed
  // exactly once and freed before the next.
  std::vector<size_t> order(plans.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return plans[a].rec < plans[b].rec; });

  std::vector<json> entries(static_cast<size_t>(cfg.n_sentences));
  size_t i = 0;
  while (i < order.size()) {
    const size_t rec = plans[order[i]].rec;
    std::vector<Spectrogram> slices;
    for (auto& piece : slice_recording(recordings[rec].second, cfg.slice_ms)) {
      slices.push_back(stft_spectrogram(piece, cfg.spectro));
    }
    for (; i < order.size() && plans[order[i]].rec == rec; ++i) {
      const Plan& pl = plans[order[i]];
      Rng& rk = plan_rngs[order[i]];
      SentenceTokens s = build_sentence(slices, pl.duration_ms, cfg.sentence, rk,
                                        recordings[rec].first, cfg.slice_ms);
      const std::string tok_name = "sent_" + std::to_string(pl.sentence) + ".tok";
      const std::string stats_name = "sent_" + std::to_string(pl.sentence) + ".stats";
      write_raw_f32(dir / tok_name, s.tokens);
      json st{{"mean", s.mean},         {"std", s.stdev},       {"source", s.source_id},
              {"duration_ms", s.duration_ms}, {"band_hz", s.band_hz}};
      std::ofstream sf(dir / stats_name);
      sf << st.dump(2) << "\n";
      entries[static_cast<size_t>(pl.sentence)] = json{{"tokens", tok_name}, {"stats", stats_name}};
    }
  }

  json manifest{{"format_version", 1},
                {"spectro", spectro_to_json(cfg.spectro)},
                {"sentence", json{{"image_size", cfg.sentence.image_size}, {"tokens", cfg.sentence.tokens}}},
                {"slice_ms", cfg.slice_ms},
                {"seed", cfg.seed},
                {"n_sentences", cfg.n_sentences},
                {"normalization", "per_sentence_standardize"},
                {"preprocessing_digest", preprocessing_digest(cfg.spectro, cfg.sentence)},
                {"entries", entries}};
  std::ofstream mf(dir / "manifest");
  if (!mf) throw FormatError("cannot write corpus manifest");
  mf << manifest.dump(2) << "\n";
}

Corpus Corpus::load(const std::filesystem::path& dir) {
  std::ifstream mf(dir / "manifest");
  if (!mf) throw FormatError("missing corpus manifest in " + dir.string());
  json manifest;
  try {
    mf >> manifest;
  } catch (const json::exception& e) {
    throw FormatError("bad corpus manifest: " + std::string(e.what()));
  }

  Corpus c;
  c.meta.spectro = spectro_from_json(manifest.at("spectro"));
  c.meta.sentence.image_size = manifest.at("sentence").at("image_size").get<int64_t>();
  c.meta.sentence.tokens = manifest.at("sentence").at("tokens").get<int64_t>();
  c.meta.slice_ms = manifest.at("slice_ms").get<double>();
  c.meta.seed = manifest.at("seed").get<uint64_t>();
  c.meta.n_sentences = manifest.at("n_sentences").get<int64_t>();
  c.meta.digest = manifest.at("preprocessing_digest").get<uint64_t>();

  const int64_t t = c.meta.sentence.tokens;
  const int64_t f = c.meta.sentence.image_size;
  const int64_t w = c.meta.sentence.token_width();
  for (const auto& e : manifest.at("entries")) {
    SentenceTokens s;
    s.tokens = read_raw_f32(dir / e.at("tokens").get<std::string>(), {t, f, w});
    std::ifstream sf(dir / e.at("stats").get<std::string>());
    if (!sf) throw FormatError("missing sentence stats file");
    json st;
    sf >> st;
    s.mean = st.at("mean").get<double>();
    s.stdev = st.at("std").get<double>();
    s.source_id = st.at("source").get<std::string>();
    s.duration_ms = st.at("duration_ms").get<double>();
    s.band_hz = st.at("band_hz").get<double>();
    c.sentences.push_back(std::move(s));
  }
  if (static_cast<int64_t>(c.sentences.size()) != c.meta.n_sentences) {
    throw FormatError("corpus manifest count does not match stored sentences");
  }
  return c;
}

}  // namespace speclearn
