#include <doctest.h>

#include <filesystem>

#include "oracle_helpers.hpp"
#include "speclearn/errors.hpp"
#include "speclearn/rng.hpp"
#include "speclearn/sentence.hpp"
#include "speclearn/spectrogram.hpp"

using namespace speclearn;
namespace fs = std::filesystem;

namespace {

IQRecording white_recording(double fs, int64_t n, uint64_t seed) {
  IQRecording rec;
  rec.sample_rate_hz = fs;
  Rng rng(seed);
  for (int64_t i = 0; i < n; ++i) {
    const auto z = rng.cnormal(1.0);
    rec.samples.emplace_back(static_cast<float>(z.real()), static_cast<float>(z.imag()));
  }
  return rec;
}

}  // namespace

TEST_CASE("slicing") {
  const IQRecording rec = white_recording(10e6, 1000000, 1);  // 100 ms
  const auto slices = slice_recording(rec, 2.0);
  CHECK(slices.size() == 50);
  for (const auto& s : slices) CHECK(s.samples.size() == 20000);

  IQRecording five_ms = white_recording(10e6, 50000, 2);
  CHECK(slice_recording(five_ms, 2.0).size() == 2);  // 1 ms discarded

  IQRecording exact = white_recording(10e6, 20000, 3);
  CHECK(slice_recording(exact, 2.0).size() == 1);

  IQRecording tiny = white_recording(10e6, 100, 4);
  CHECK_THROWS_AS(slice_recording(tiny, 2.0), DataError);
}

TEST_CASE("stft frame count formula") {
  CHECK(stft_frame_count(20000, 512, 512) == 39);

  // property: matches direct enumeration of window start offsets
  Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const int64_t n = 1 + rng.uniform_int(5000);
    const int window = 1 + static_cast<int>(rng.uniform_int(600));
    const int hop = 1 + static_cast<int>(rng.uniform_int(300));
    int64_t direct = 0;
    for (int64_t start = 0; start + window <= n; start += hop) ++direct;
    CHECK(stft_frame_count(n, window, hop) == direct);
  }
}

TEST_CASE("stft spectrogram") {
  const double fs = 1e6;
  SpectroParams p;

  SUBCASE("tone at fs/4 peaks at the right bin") {
    IQRecording tone;
    tone.sample_rate_hz = fs;
    for (int64_t n = 0; n < 20000; ++n) {
      const double ang = 2.0 * M_PI * 0.25 * static_cast<double>(n);
      tone.samples.emplace_back(static_cast<float>(std::cos(ang)),
                                static_cast<float>(std::sin(ang)));
    }
    const Spectrogram spec = stft_spectrogram(tone, p);
    CHECK(spec.rows() == 1024);
    CHECK(spec.cols() == 39);
    for (int64_t frame = 0; frame < spec.cols(); ++frame) {
      int64_t argmax = 0;
      for (int64_t r = 1; r < 1024; ++r) {
        if (spec.values.at(r, frame) > spec.values.at(argmax, frame)) argmax = r;
      }
      const double freq = spec.freq_start_hz + static_cast<double>(argmax) * spec.hz_per_bin;
      CHECK(std::abs(freq - fs / 4) <= spec.hz_per_bin / 2);
    }

    // direct-summation oracle for one frame: windowed, zero-padded DFT power
    std::vector<std::complex<double>> frame(static_cast<size_t>(p.fft_size), {0.0, 0.0});
    for (int i = 0; i < p.window_size; ++i) {
      const double win = 0.5 * (1.0 - std::cos(2.0 * M_PI * i / p.window_size));
      frame[static_cast<size_t>(i)] = std::complex<double>(tone.samples[static_cast<size_t>(i)]) * win;
    }
    const auto resp = oracle::dft_direct(frame);
    for (int64_t r = 0; r < 1024; ++r) {
      const auto src = static_cast<size_t>((r + 512) % 1024);
      const double expected = 10.0 * std::log10(std::norm(resp[src]) + p.linear_floor());
      CHECK(spec.values.at(r, 0) == doctest::Approx(expected).epsilon(1e-4));
    }
  }

  SUBCASE("all-zero input hits the log floor") {
    IQRecording zero;
    zero.sample_rate_hz = fs;
    zero.samples.assign(4096, {0.0f, 0.0f});
    const Spectrogram spec = stft_spectrogram(zero, p);
    const float floor_db = static_cast<float>(10.0 * std::log10(p.linear_floor()));
    for (int64_t i = 0; i < spec.values.size(); ++i) CHECK(spec.values[i] == floor_db);
  }

  SUBCASE("x10 amplitude adds exactly 20 dB") {
    SpectroParams deep = p;
    deep.log_floor_db = -300.0;  // make the floor negligible
    IQRecording a = white_recording(fs, 4096, 6);
    // quantize so multiplication by 10 is exact in float32
    for (auto& s : a.samples) {
      s = std::complex<float>(std::round(s.real() * 1024.0f) / 1024.0f,
                              std::round(s.imag() * 1024.0f) / 1024.0f);
    }
    IQRecording b = a;
    for (auto& s : b.samples) s *= 10.0f;
    const Spectrogram sa = stft_spectrogram(a, deep);
    const Spectrogram sb = stft_spectrogram(b, deep);
    for (int64_t i = 0; i < sa.values.size(); ++i) {
      // exact up to the float32 quantization of the stored entries
      const double tol = 1e-6 + 4.0 * std::numeric_limits<float>::epsilon() *
                                     std::max(std::abs(sa.values[i]), std::abs(sb.values[i]));
      CHECK(std::abs(static_cast<double>(sb.values[i]) - sa.values[i] - 20.0) <= tol);
    }
  }

  SUBCASE("too-short input") {
    IQRecording tiny = white_recording(fs, 100, 7);
    CHECK_THROWS_AS(stft_spectrogram(tiny, p), DataError);
  }
}

TEST_CASE("bilinear resize") {
  SUBCASE("constant stays constant") {
    const Tensor<float> img = Tensor<float>::full({17, 31}, 3.25f);
    const Tensor<float> out = resize_image(img, 256, 256);
    for (int64_t i = 0; i < out.size(); ++i) CHECK(out[i] == doctest::Approx(3.25f));
  }

  SUBCASE("identity resize is bit-exact") {
    Rng rng(8);
    Tensor<float> img({256, 256});
    for (int64_t i = 0; i < img.size(); ++i) img[i] = static_cast<float>(rng.normal());
    const Tensor<float> out = resize_image(img, 256, 256);
    bool exact = true;
    for (int64_t i = 0; i < img.size(); ++i) {
      if (out[i] != img[i]) exact = false;
    }
    CHECK(exact);
  }

  SUBCASE("linear ramps are preserved") {
    Tensor<float> ramp({512, 512});
    for (int64_t r = 0; r < 512; ++r) {
      for (int64_t c = 0; c < 512; ++c) {
        ramp.at(r, c) = static_cast<float>(2.0 * r + 0.5 * c);
      }
    }
    const Tensor<float> out = resize_image(ramp, 256, 256);
    // corner-aligned bilinear maps output (r, c) to source (r*511/255, c*511/255)
    for (int64_t r = 0; r < 256; ++r) {
      for (int64_t c = 0; c < 256; ++c) {
        const double expect = 2.0 * (r * 511.0 / 255.0) + 0.5 * (c * 511.0 / 255.0);
        CHECK(out.at(r, c) == doctest::Approx(expect).epsilon(1e-6));
      }
    }
  }

  SUBCASE("empty input") {
    Tensor<float> empty;
    CHECK_THROWS_AS(resize_image(empty, 4, 4), DimensionError);
  }
}

TEST_CASE("tokenize partitions exactly") {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const int64_t t_tokens = 1 + rng.uniform_int(16);
    const int64_t f = 1 + rng.uniform_int(64);
    const int64_t w = 1 + rng.uniform_int(8);
    Tensor<float> img({f, t_tokens * w});
    for (int64_t i = 0; i < img.size(); ++i) img[i] = static_cast<float>(rng.normal());
    const Tensor<float> tokens = tokenize_image(img, t_tokens);
    CHECK(tokens.shape() == std::vector<int64_t>{t_tokens, f, w});
    const Tensor<float> back = detokenize(tokens);
    bool exact = true;
    for (int64_t i = 0; i < img.size(); ++i) {
      if (back[i] != img[i]) exact = false;
    }
    CHECK(exact);
  }
}

TEST_CASE("sentence construction") {
  const IQRecording rec = white_recording(1.024e6, 102400, 10);  // 100 ms
  SpectroParams sp;
  std::vector<Spectrogram> slices;
  for (auto& piece : slice_recording(rec, 2.0)) slices.push_back(stft_spectrogram(piece, sp));
  REQUIRE(slices.size() == 50);

  SentenceConfig sc;
  sc.image_size = 256;
  sc.tokens = 16;
  Rng rng(11);
  const SentenceTokens s = build_sentence(slices, 20.0, sc, rng, "rec0");
  CHECK(s.tokens.shape() == std::vector<int64_t>{16, 256, 16});
  CHECK(s.duration_ms == 20.0);
  CHECK(s.band_hz == doctest::Approx(1.024e6));

  double mean = 0.0;
  for (int64_t i = 0; i < s.tokens.size(); ++i) mean += s.tokens[i];
  mean /= static_cast<double>(s.tokens.size());
  double var = 0.0;
  for (int64_t i = 0; i < s.tokens.size(); ++i) {
    const double d = s.tokens[i] - mean;
    var += d * d;
  }
  CHECK(std::abs(mean) < 1e-5);
  CHECK(std::abs(std::sqrt(var / static_cast<double>(s.tokens.size())) - 1.0) < 1e-4);

  // a 20 ms sentence needs 10 slices
  std::vector<Spectrogram> nine(slices.begin(), slices.begin() + 9);
  CHECK_THROWS_AS(build_sentence(nine, 20.0, sc, rng), DataError);
  std::vector<Spectrogram> ten(slices.begin(), slices.begin() + 10);
  CHECK_NOTHROW(build_sentence(ten, 20.0, sc, rng));
}

TEST_CASE("corpus round trip") {
  const fs::path dir = fs::temp_directory_path() / "speclearn_corpus_test";
  fs::remove_all(dir);

  // 240 recordings of 100 ms each: about 24 s of activity, one pass
  std::vector<std::pair<std::string, IQRecording>> recs;
  for (int i = 0; i < 240; ++i) {
    recs.emplace_back("rec" + std::to_string(i),
                      white_recording(1.024e6, 102400, 100 + static_cast<uint64_t>(i)));
  }

  CorpusConfig cfg;
  cfg.sentence.image_size = 32;
  cfg.sentence.tokens = 16;
  cfg.n_sentences = 30;
  cfg.seed = 12;
  build_corpus(recs, cfg, dir);

  const Corpus corpus = Corpus::load(dir);
  CHECK(corpus.meta.n_sentences == 30);
  CHECK(corpus.sentences.size() == 30);
  CHECK(corpus.meta.digest == preprocessing_digest(cfg.spectro, cfg.sentence));

  // rebuilt corpus loads bit-identical tensors
  const fs::path dir2 = fs::temp_directory_path() / "speclearn_corpus_test2";
  fs::remove_all(dir2);
  build_corpus(recs, cfg, dir2);
  const Corpus again = Corpus::load(dir2);
  for (size_t i = 0; i < corpus.sentences.size(); ++i) {
    const auto& a = corpus.sentences[i].tokens;
    const auto& b = again.sentences[i].tokens;
    REQUIRE(a.size() == b.size());
    bool exact = true;
    for (int64_t j = 0; j < a.size(); ++j) {
      if (a[j] != b[j]) exact = false;
    }
    CHECK(exact);
    CHECK(corpus.sentences[i].duration_ms == again.sentences[i].duration_ms);
  }

  fs::remove_all(dir);
  fs::remove_all(dir2);
}

TEST_CASE("preprocessing digest is sensitive to its inputs") {
  SpectroParams sp;
  SentenceConfig sc;
  const uint64_t base = preprocessing_digest(sp, sc);
  SpectroParams sp2 = sp;
  sp2.fft_size = 2048;
  CHECK(preprocessing_digest(sp2, sc) != base);
  SentenceConfig sc2 = sc;
  sc2.image_size = 64;
  CHECK(preprocessing_digest(sp, sc2) != base);
}
