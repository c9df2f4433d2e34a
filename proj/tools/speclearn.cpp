// speclearn command-line driver: dataset synthesis, corpus building,
// pretraining, fine-tuning, evaluation and figure emission.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "speclearn/channel.hpp"
#include "speclearn/checkpoint.hpp"
#include "speclearn/confusion.hpp"
#include "speclearn/errors.hpp"
#include "speclearn/fft.hpp"
#include "speclearn/parallel.hpp"
#include "speclearn/report.hpp"
#include "speclearn/rollout.hpp"
#include "speclearn/segdata.hpp"
#include "speclearn/sentence.hpp"
#include "speclearn/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace speclearn;

namespace {

struct CommonOpts {
  uint64_t seed = 1234;
  std::string config_path;
  std::string out;
  int jobs = 1;
  bool reproducible = true;
};

void add_common(CLI::App* cmd, CommonOpts& c) {
  cmd->add_option("--seed", c.seed, "global random seed");
  cmd->add_option("--config", c.config_path, "JSON config file (defaults < config < flags)");
  cmd->add_option("--out", c.out, "output directory")->required();
  cmd->add_option("--jobs", c.jobs, "worker parallelism");
  cmd->add_flag("--reproducible,!--fast", c.reproducible,
                "deterministic gradient reduction (default on)");
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw ConfigError("bad config file: " + std::string(e.what()));
  }
  return j;
}

template <typename T>
void cfg_default(const CLI::App* cmd, const std::string& flag, const json& cfg,
                 const std::string& key, T& var) {
  const CLI::Option* opt = cmd->get_option(flag);
  if (opt->count() == 0 && cfg.contains(key)) var = cfg.at(key).get<T>();
}

void persist_config(const fs::path& dir, const json& resolved) {
  fs::create_directories(dir);
  std::ofstream f(dir / "config_resolved.json");
  f << resolved.dump(2) << "\n";
}

std::vector<BlockRes> parse_blocks(const std::string& s) {
  std::vector<BlockRes> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) {
    const auto xpos = item.find("msx");
    if (xpos == std::string::npos) throw ConfigError("bad block spec '" + item + "', want e.g. 1msx5mhz");
    const std::string t = item.substr(0, xpos);
    std::string q = item.substr(xpos + 3);
    if (q.size() < 3 || q.substr(q.size() - 3) != "mhz") {
      throw ConfigError("bad block spec '" + item + "', want e.g. 1msx5mhz");
    }
    q = q.substr(0, q.size() - 3);
    try {
      out.push_back({std::stod(t), std::stod(q)});
    } catch (const std::exception&) {
      throw ConfigError("bad block numbers in '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("no block resolutions given");
  return out;
}

// ---------------------------------------------------------------- synth ----

struct SynthOpts {
  CommonOpts common;
  std::string kind = "seg";
  std::string split = "train";
  int count = 100;
  int64_t image_size = 256;
  double band_fs = 61.44e6;
  double duty = 0.7;
  int subframes = 40;
  // iq kind
  double duration_ms = 100.0;
  double iq_fs = 7.68e6;
};

int run_synth(const SynthOpts& o) {
  SegGenConfig cfg;
  cfg.split = o.split == "train" ? Split::Train : Split::Test;
  cfg.band_sample_rate_hz = o.band_fs;
  cfg.burst_duty = o.duty;
  cfg.n_subframes = o.subframes;
  cfg.image_size = o.image_size;
  cfg.validate();
  if (o.count < 1) throw ConfigError("--count must be >= 1");

  Rng root(o.common.seed);
  const fs::path out(o.common.out);

  if (o.kind == "seg") {
    // every waveform draw must be generable at the band rate; probe before
    // touching the output directory so failures leave nothing behind
    for (const double scs : {15e3, 30e3}) {
      const double fft = cfg.band_sample_rate_hz / scs;
      if (std::abs(fft - std::round(fft)) > 1e-6 || !is_pow2(static_cast<size_t>(fft))) {
        throw ConfigError("band sample rate must be a power-of-two multiple of 15 and 30 kHz");
      }
    }
    std::vector<SegExample> examples(static_cast<size_t>(o.count));
    parallel_for(o.count, o.common.jobs, [&](int64_t k) {
      Rng rk = root.fork(static_cast<uint64_t>(k));
      examples[static_cast<size_t>(k)] = make_segmentation_example(cfg, rk);
    });
    write_seg_dataset(out, cfg, examples, o.common.seed);
    persist_config(out, json{{"command", "synth"},
                             {"kind", "seg"},
                             {"split", o.split},
                             {"count", o.count},
                             {"image_size", o.image_size},
                             {"band_fs", o.band_fs},
                             {"duty", o.duty},
                             {"subframes", o.subframes},
                             {"seed", o.common.seed}});
    std::cout << "wrote " << o.count << " segmentation examples (" << o.split << ") to " << out
              << "\n";
    return 0;
  }

  if (o.kind == "iq") {
    const double fft = o.iq_fs / 15e3;
    if (std::abs(fft - std::round(fft)) > 1e-6 || !is_pow2(static_cast<size_t>(fft))) {
      throw ConfigError("--fs must be a power-of-two multiple of 15 kHz");
    }
    fs::create_directories(out);
    const int n_subframes = std::max(1, static_cast<int>(o.duration_ms));
    // duty-cycled 5 MHz LTE-like signals, as many as the band fits (max 2)
    const double usable = 0.9 * o.iq_fs;
    const int max_sig = std::min(2, static_cast<int>(usable / 5e6));
    if (max_sig < 1) throw ConfigError("--fs too small for one 5 MHz signal");
    parallel_for(o.count, o.common.jobs, [&](int64_t k) {
      Rng rk = root.fork(static_cast<uint64_t>(k));
      const int n_sig = 1 + static_cast<int>(rk.uniform_int(max_sig));
      std::vector<IQRecording> sigs;
      MixturePlacement placement;
      placement.band_sample_rate_hz = o.iq_fs;
      placement.band_center_freq_hz = 2.45e9;
      const double slot = usable / n_sig;
      for (int s = 0; s < n_sig; ++s) {
        WaveformConfig wc;
        wc.standard = Standard::LteLike;
        wc.bandwidth_hz = 5e6;
        wc.scs_hz = 15e3;
        wc.n_subframes = n_subframes;
        wc.burst_duty = 0.6 + 0.3 * rk.uniform();
        wc.max_bursts = 2;  // long dwell times, like real captures
        BurstSignal bs = generate_ofdm_burst_ex(wc, rk.fork(7 + static_cast<uint64_t>(s)).seed(),
                                                o.iq_fs);
        IQRecording faded = apply_channel(
            bs.rec, ChannelConfig::default_profile(rk.fork(17 + static_cast<uint64_t>(s)).seed(), 20.0));
        sigs.push_back(std::move(faded));
        const double lo = -usable / 2 + slot * s;
        placement.offsets_hz.push_back(lo + slot / 2 + (slot - 5e6) * (rk.uniform() - 0.5));
        placement.bandwidths_hz.push_back(5e6);
      }
      IQRecording mix = upconvert_and_mix(sigs, placement);
      mix = scale_to_power_dbm(mix, -40.0);
      Rng noise_rng = rk.fork(99);
      mix = add_noise(mix, noise_rng.uniform(-75.0, -60.0), noise_rng);
      save_iq_recording(mix, fs::path(o.common.out) / ("rec_" + std::to_string(k) + ".iq"));
    });
    persist_config(out, json{{"command", "synth"},
                             {"kind", "iq"},
                             {"count", o.count},
                             {"duration_ms", o.duration_ms},
                             {"fs", o.iq_fs},
                             {"seed", o.common.seed}});
    std::cout << "wrote " << o.count << " IQ recordings to " << out << "\n";
    return 0;
  }
  throw ConfigError("--kind must be seg or iq");
}

// --------------------------------------------------------------- corpus ----

struct CorpusOpts {
  CommonOpts common;
  std::string input;
  int64_t sentences = 100;
  int64_t image_size = 256;
  int64_t tokens = 16;
  int fft_size = 1024;
  int window_size = 512;
  int hop_size = 512;
  double log_floor_db = -120.0;
};

int run_corpus(const CorpusOpts& o) {
  const fs::path in(o.input);
  if (!fs::is_directory(in)) throw ConfigError("input directory does not exist: " + o.input);

  std::vector<fs::path> iq_files;
  for (const auto& e : fs::directory_iterator(in)) {
    if (e.path().extension() == ".iq") iq_files.push_back(e.path());
  }
  std::sort(iq_files.begin(), iq_files.end());
  if (iq_files.empty()) throw ConfigError("no .iq recordings in " + o.input);

  std::vector<std::pair<std::string, IQRecording>> recordings;
  for (const auto& p : iq_files) {
    try {
      recordings.emplace_back(p.stem().string(), load_iq_recording(p));
    } catch (const Error& e) {
      std::cerr << "warning: skipping " << p << ": " << e.what() << "\n";
    }
  }
  if (recordings.empty()) throw ConfigError("all recordings were unreadable");

  CorpusConfig cfg;
  cfg.spectro.fft_size = o.fft_size;
  cfg.spectro.window_size = o.window_size;
  cfg.spectro.hop_size = o.hop_size;
  cfg.spectro.log_floor_db = o.log_floor_db;
  cfg.sentence.image_size = o.image_size;
  cfg.sentence.tokens = o.tokens;
  cfg.n_sentences = o.sentences;
  cfg.seed = o.common.seed;

  build_corpus(recordings, cfg, o.common.out);
  persist_config(o.common.out, json{{"command", "corpus"},
                                    {"input", o.input},
                                    {"sentences", o.sentences},
                                    {"image_size", o.image_size},
                                    {"tokens", o.tokens},
                                    {"fft_size", o.fft_size},
                                    {"window_size", o.window_size},
                                    {"hop_size", o.hop_size},
                                    {"log_floor_db", o.log_floor_db},
                                    {"seed", o.common.seed}});
  std::cout << "corpus with " << o.sentences << " sentences written to " << o.common.out << "\n";
  return 0;
}

// ----------------------------------------------------- training commands ----

struct TrainOpts {
  CommonOpts common;
  std::string corpus_dir;
  std::string data_dir;
  std::string ckpt_path;
  std::string task = "forecast";
  int layers = 5;
  int channels = 64;
  bool peephole = true;
  int seg_hidden = 32;
  int epochs = 20;
  int batch = 8;
  double lr = 1e-3;
  double mask_ratio = 0.2;
  double train_frac = 0.8;
};

ModelConfig model_config_for_corpus(const TrainOpts& o, const Corpus& corpus) {
  ModelConfig mc;
  mc.layers = o.layers;
  mc.channels = o.channels;
  mc.peephole = o.peephole;
  mc.seg_hidden = o.seg_hidden;
  mc.token_height = corpus.meta.sentence.image_size;
  mc.token_width = corpus.meta.sentence.token_width();
  mc.tokens_per_sentence = corpus.meta.sentence.tokens;
  return mc;
}

TrainConfig train_config_for(const TrainOpts& o, Task task) {
  TrainConfig tc;
  tc.task = task;
  tc.mask_ratio = o.mask_ratio;
  tc.batch_size = o.batch;
  tc.epochs = o.epochs;
  tc.lr = o.lr;
  tc.seed = o.common.seed;
  tc.jobs = o.common.jobs;
  tc.reproducible = o.common.reproducible;
  return tc;
}

json train_opts_json(const TrainOpts& o, const std::string& command) {
  return json{{"command", command},   {"corpus", o.corpus_dir}, {"data", o.data_dir},
              {"ckpt", o.ckpt_path},  {"task", o.task},         {"layers", o.layers},
              {"channels", o.channels}, {"peephole", o.peephole}, {"seg_hidden", o.seg_hidden},
              {"epochs", o.epochs},   {"batch", o.batch},       {"lr", o.lr},
              {"mask_ratio", o.mask_ratio}, {"train_frac", o.train_frac},
              {"seed", o.common.seed}, {"jobs", o.common.jobs},
              {"reproducible", o.common.reproducible}};
}

int run_pretrain(const TrainOpts& o) {
  const Corpus corpus = Corpus::load(o.corpus_dir);
  const ModelConfig mc = model_config_for_corpus(o, corpus);
  TrainConfig tc = train_config_for(o, Task::Msm);

  persist_config(o.common.out, train_opts_json(o, "pretrain"));
  TrainLogger logger(o.common.out, "train_msm");
  const auto init = init_weights<float>(mc, o.common.seed);
  const Checkpoint ckpt = pretrain(init, corpus, tc, &logger);
  save_checkpoint(ckpt, fs::path(o.common.out) / "ckpt_msm.bin");
  std::cout << "pretrained checkpoint: " << (fs::path(o.common.out) / "ckpt_msm.bin") << "\n";
  return 0;
}

Task parse_task(const std::string& s) {
  if (s == "forecast") return Task::Forecast;
  if (s == "segment") return Task::Segment;
  throw ConfigError("--task must be forecast or segment");
}

// Builds the train-side TaskData (and keeps the owning datasets alive).
struct LoadedTask {
  Corpus corpus;
  SegDataset seg;
  TaskData train_data;
  TaskData test_data;
};

LoadedTask load_task_data(const TrainOpts& o, Task task) {
  LoadedTask lt;
  if (task == Task::Forecast) {
    if (o.corpus_dir.empty()) throw ConfigError("forecast task needs --corpus");
    lt.corpus = Corpus::load(o.corpus_dir);
    auto [train_idx, test_idx] =
        split_sentences_by_recording(lt.corpus, o.train_frac, lt.corpus.meta.seed ^ 0x5157u);
    lt.train_data.corpus = &lt.corpus;
    lt.train_data.indices = std::move(train_idx);
    lt.test_data.corpus = &lt.corpus;
    lt.test_data.indices = std::move(test_idx);
  } else {
    if (o.data_dir.empty()) throw ConfigError("segment task needs --data");
    lt.seg = SegDataset::load(o.data_dir);
    lt.train_data.seg = &lt.seg;
    lt.test_data.seg = &lt.seg;
  }
  return lt;
}

int run_finetune(const TrainOpts& o) {
  if (o.ckpt_path.empty() || !fs::exists(o.ckpt_path)) {
    throw ConfigError("missing checkpoint path");
  }
  const Task task = parse_task(o.task);
  const Checkpoint ckpt = load_checkpoint(o.ckpt_path);
  LoadedTask lt = load_task_data(o, task);

  persist_config(o.common.out, train_opts_json(o, "finetune"));
  TrainLogger logger(o.common.out, "finetune_" + o.task);
  const Checkpoint tuned = finetune(ckpt, lt.train_data, train_config_for(o, task), &logger);
  const fs::path out_ckpt = fs::path(o.common.out) / ("ckpt_" + o.task + ".bin");
  save_checkpoint(tuned, out_ckpt);
  std::cout << "fine-tuned checkpoint: " << out_ckpt << "\n";
  return 0;
}

int run_baseline(const TrainOpts& o) {
  const Task task = parse_task(o.task);
  LoadedTask lt = load_task_data(o, task);

  ModelConfig mc;
  if (task == Task::Forecast) {
    mc = model_config_for_corpus(o, lt.corpus);
  } else {
    mc.layers = o.layers;
    mc.channels = o.channels;
    mc.peephole = o.peephole;
    mc.seg_hidden = o.seg_hidden;
    mc.token_height = lt.seg.image_size;
    mc.token_width = lt.seg.image_size / 16;
    mc.tokens_per_sentence = 16;
  }

  persist_config(o.common.out, train_opts_json(o, "baseline"));
  TrainLogger logger(o.common.out, "baseline_" + o.task);
  const Checkpoint ckpt =
      train_from_scratch(mc, lt.train_data, train_config_for(o, task), &logger);
  const fs::path out_ckpt = fs::path(o.common.out) / ("ckpt_baseline_" + o.task + ".bin");
  save_checkpoint(ckpt, out_ckpt);
  std::cout << "baseline checkpoint: " << out_ckpt << "\n";
  return 0;
}

// ----------------------------------------------------------------- eval ----

struct EvalOpts {
  TrainOpts train;  // reuses corpus/data/ckpt/task plumbing
  std::string blocks = "1msx5mhz";
  int steps = 4;
  double max_noise_dbm = 1e9;
};

int run_eval(const EvalOpts& o) {
  if (o.train.ckpt_path.empty() || !fs::exists(o.train.ckpt_path)) {
    throw ConfigError("missing checkpoint path");
  }
  const Task task = parse_task(o.train.task);
  const Checkpoint ckpt = load_checkpoint(o.train.ckpt_path);
  LoadedTask lt = load_task_data(o.train, task);
  if (lt.test_data.preprocessing_digest() != ckpt.preprocessing_digest) {
    throw CompatError("preprocessing digest mismatch between checkpoint and dataset");
  }

  const fs::path out(o.train.common.out);
  json resolved = train_opts_json(o.train, "eval");
  resolved["blocks"] = o.blocks;
  resolved["steps"] = o.steps;
  resolved["max_noise_dbm"] = o.max_noise_dbm;
  persist_config(out, resolved);

  if (task == Task::Forecast) {
    std::vector<const SentenceTokens*> test;
    for (const int64_t i : lt.test_data.indices) {
      test.push_back(&lt.corpus.sentences[static_cast<size_t>(i)]);
    }
    if (test.empty()) throw DataError("empty test split");
    const OccupancyReport report = forecast_occupancy_eval(
        model_forecaster(ckpt.params), test, parse_blocks(o.blocks), o.steps);
    write_occupancy_report(out / "occupancy_report.json", report);
    svg_occupancy_curves(out / "fig_occupancy_recall.svg", report, "Occupied-block recall");
    for (size_t b = 0; b < report.blocks.size(); ++b) {
      std::cout << report.blocks[b].label() << ": pooled recall " << report.pooled[b].recall()
                << " over " << report.pooled[b].occupied << " occupied blocks\n";
    }
    return 0;
  }

  std::vector<std::string> class_names = {"noise", "nr", "lte"};
  if (ckpt.params.cfg.seg_classes != 3) class_names.clear();  // fall back to generic names
  ConfusionMatrix full(ckpt.params.cfg.seg_classes, class_names);
  int64_t used = 0;
  for (size_t i = 0; i < lt.seg.specs.size(); ++i) {
    if (lt.seg.noise_dbm[i] > o.max_noise_dbm) continue;
    const LabelImage pred = predict_segmentation(ckpt.params, lt.seg.specs[i]);
    full.add(lt.seg.labels[i], pred);
    ++used;
  }
  if (used == 0) throw DataError("no examples after the noise filter");
  const ConfusionMatrix binary = full.merged_binary();
  write_confusion_report(out / "confusion_report.json", full, binary);
  svg_confusion_heatmap(out / "fig_confusion_full.svg", full, "Segmentation confusion");
  svg_confusion_heatmap(out / "fig_confusion_binary.svg", binary, "Binary segmentation confusion");
  std::cout << "evaluated " << used << " examples\n";
  for (int64_t c = 0; c < full.classes(); ++c) {
    std::cout << full.names()[static_cast<size_t>(c)] << " recall " << full.recall(c) << "\n";
  }
  std::cout << "binary: noise recall " << binary.recall(0) << ", signal recall "
            << binary.recall(1) << "\n";
  return 0;
}

// ----------------------------------------------------------------- plot ----

struct PlotOpts {
  std::string report;
  std::string out;
};

int run_plot(const PlotOpts& o) {
  if (!fs::exists(o.report)) throw ConfigError("missing report file: " + o.report);
  std::ifstream f(o.report);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw FormatError("bad report: " + std::string(e.what()));
  }
  fs::create_directories(o.out);
  const std::string kind = j.value("kind", "");
  if (kind == "occupancy_recall") {
    plot_occupancy_report_file(o.report, o.out);
    std::cout << "wrote " << (fs::path(o.out) / "fig_occupancy_recall.svg") << "\n";
    return 0;
  }
  if (kind == "segmentation_confusion") {
    auto from_json = [](const json& cj) {
      std::vector<std::string> names = cj.at("classes").get<std::vector<std::string>>();
      ConfusionMatrix cm(static_cast<int>(names.size()), names);
      const auto& counts = cj.at("counts");
      for (size_t i = 0; i < names.size(); ++i) {
        for (size_t jj = 0; jj < names.size(); ++jj) {
          cm.add_count(static_cast<int64_t>(i), static_cast<int64_t>(jj),
                       counts[i][jj].get<int64_t>());
        }
      }
      return cm;
    };
    const ConfusionMatrix full = from_json(j.at("full"));
    const ConfusionMatrix binary = from_json(j.at("binary"));
    svg_confusion_heatmap(fs::path(o.out) / "fig_confusion_full.svg", full,
                          "Segmentation confusion");
    svg_confusion_heatmap(fs::path(o.out) / "fig_confusion_binary.svg", binary,
                          "Binary segmentation confusion");
    std::cout << "wrote confusion figures to " << o.out << "\n";
    return 0;
  }
  throw FormatError("unknown report kind: " + kind);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-supervised spectrogram learning toolkit"};
  app.require_subcommand(1);

  SynthOpts synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "generate segmentation or IQ datasets");
  add_common(synth_cmd, synth.common);
  synth_cmd->add_option("--kind", synth.kind, "seg | iq");
  synth_cmd->add_option("--split", synth.split, "train | test")
      ->check(CLI::IsMember({"train", "test"}));
  synth_cmd->add_option("--count", synth.count, "number of examples / recordings");
  synth_cmd->add_option("--image-size", synth.image_size, "segmentation image size");
  synth_cmd->add_option("--band-fs", synth.band_fs, "band sample rate (Hz)");
  synth_cmd->add_option("--duty", synth.duty, "burst duty cycle");
  synth_cmd->add_option("--subframes", synth.subframes, "subframes per signal (1 ms each)");
  synth_cmd->add_option("--duration-ms", synth.duration_ms, "IQ recording duration");
  synth_cmd->add_option("--fs", synth.iq_fs, "IQ recording sample rate (Hz)");

  CorpusOpts corpus;
  CLI::App* corpus_cmd = app.add_subcommand("corpus", "build a sentence corpus from recordings");
  add_common(corpus_cmd, corpus.common);
  corpus_cmd->add_option("--input", corpus.input, "directory of .iq recordings")->required();
  corpus_cmd->add_option("--sentences", corpus.sentences, "sentences to draw");
  corpus_cmd->add_option("--image-size", corpus.image_size, "sentence image size");
  corpus_cmd->add_option("--tokens", corpus.tokens, "tokens per sentence");
  corpus_cmd->add_option("--fft", corpus.fft_size, "FFT size");
  corpus_cmd->add_option("--window", corpus.window_size, "window size");
  corpus_cmd->add_option("--hop", corpus.hop_size, "hop size");
  corpus_cmd->add_option("--log-floor-db", corpus.log_floor_db, "linear power floor (dB)");

  TrainOpts pre;
  CLI::App* pre_cmd = app.add_subcommand("pretrain", "masked-reconstruction pretraining");
  add_common(pre_cmd, pre.common);
  pre_cmd->add_option("--corpus", pre.corpus_dir, "sentence corpus directory")->required();
  pre_cmd->add_option("--layers", pre.layers);
  pre_cmd->add_option("--channels", pre.channels);
  pre_cmd->add_flag("--peephole,!--no-peephole", pre.peephole, "peephole connections");
  pre_cmd->add_option("--seg-hidden", pre.seg_hidden);
  pre_cmd->add_option("--epochs", pre.epochs);
  pre_cmd->add_option("--batch", pre.batch);
  pre_cmd->add_option("--lr", pre.lr);
  pre_cmd->add_option("--mask-ratio", pre.mask_ratio);

  TrainOpts fin;
  CLI::App* fin_cmd = app.add_subcommand("finetune", "frozen-backbone head fine-tuning");
  add_common(fin_cmd, fin.common);
  fin_cmd->add_option("--ckpt", fin.ckpt_path, "pretrained checkpoint")->required();
  fin_cmd->add_option("--task", fin.task, "forecast | segment")->required();
  fin_cmd->add_option("--corpus", fin.corpus_dir, "sentence corpus (forecast)");
  fin_cmd->add_option("--data", fin.data_dir, "segmentation dataset (segment)");
  fin_cmd->add_option("--epochs", fin.epochs);
  fin_cmd->add_option("--batch", fin.batch);
  fin_cmd->add_option("--lr", fin.lr);
  fin_cmd->add_option("--train-frac", fin.train_frac, "train fraction of the corpus split");

  TrainOpts base;
  CLI::App* base_cmd = app.add_subcommand("baseline", "train the comparator from scratch");
  add_common(base_cmd, base.common);
  base_cmd->add_option("--task", base.task, "forecast | segment")->required();
  base_cmd->add_option("--corpus", base.corpus_dir, "sentence corpus (forecast)");
  base_cmd->add_option("--data", base.data_dir, "segmentation dataset (segment)");
  base_cmd->add_option("--layers", base.layers);
  base_cmd->add_option("--channels", base.channels);
  base_cmd->add_flag("--peephole,!--no-peephole", base.peephole, "peephole connections");
  base_cmd->add_option("--seg-hidden", base.seg_hidden);
  base_cmd->add_option("--epochs", base.epochs);
  base_cmd->add_option("--batch", base.batch);
  base_cmd->add_option("--lr", base.lr);
  base_cmd->add_option("--train-frac", base.train_frac);

  EvalOpts ev;
  CLI::App* eval_cmd = app.add_subcommand("eval", "metrics and figures for a checkpoint");
  add_common(eval_cmd, ev.train.common);
  eval_cmd->add_option("--ckpt", ev.train.ckpt_path, "checkpoint to evaluate")->required();
  eval_cmd->add_option("--task", ev.train.task, "forecast | segment")->required();
  eval_cmd->add_option("--corpus", ev.train.corpus_dir, "sentence corpus (forecast)");
  eval_cmd->add_option("--data", ev.train.data_dir, "segmentation dataset (segment)");
  eval_cmd->add_option("--train-frac", ev.train.train_frac);
  eval_cmd->add_option("--blocks", ev.blocks, "comma list, e.g. 1msx5mhz,2msx10mhz");
  eval_cmd->add_option("--steps", ev.steps, "rollout horizon in tokens");
  eval_cmd->add_option("--max-noise-dbm", ev.max_noise_dbm,
                       "only evaluate examples at or below this noise power");

  PlotOpts plot;
  CLI::App* plot_cmd = app.add_subcommand("plot", "re-render figures from a metric report");
  plot_cmd->add_option("--report", plot.report, "metric report (JSON)")->required();
  plot_cmd->add_option("--out", plot.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // exits 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    // config file values fill in anything not given on the command line
    for (auto [cmd, common] : std::initializer_list<std::pair<CLI::App*, CommonOpts*>>{
             {synth_cmd, &synth.common},
             {corpus_cmd, &corpus.common},
             {pre_cmd, &pre.common},
             {fin_cmd, &fin.common},
             {base_cmd, &base.common},
             {eval_cmd, &ev.train.common}}) {
      if (!cmd->parsed()) continue;
      const json cfg = load_config(common->config_path);
      cfg_default(cmd, "--seed", cfg, "seed", common->seed);
      cfg_default(cmd, "--jobs", cfg, "jobs", common->jobs);
    }
    if (synth_cmd->parsed()) {
      const json cfg = load_config(synth.common.config_path);
      cfg_default(synth_cmd, "--kind", cfg, "kind", synth.kind);
      cfg_default(synth_cmd, "--split", cfg, "split", synth.split);
      cfg_default(synth_cmd, "--count", cfg, "count", synth.count);
      cfg_default(synth_cmd, "--image-size", cfg, "image_size", synth.image_size);
      cfg_default(synth_cmd, "--band-fs", cfg, "band_fs", synth.band_fs);
      cfg_default(synth_cmd, "--duty", cfg, "duty", synth.duty);
      cfg_default(synth_cmd, "--subframes", cfg, "subframes", synth.subframes);
      cfg_default(synth_cmd, "--duration-ms", cfg, "duration_ms", synth.duration_ms);
      cfg_default(synth_cmd, "--fs", cfg, "fs", synth.iq_fs);
      return run_synth(synth);
    }
    if (corpus_cmd->parsed()) {
      const json cfg = load_config(corpus.common.config_path);
      cfg_default(corpus_cmd, "--sentences", cfg, "sentences", corpus.sentences);
      cfg_default(corpus_cmd, "--image-size", cfg, "image_size", corpus.image_size);
      cfg_default(corpus_cmd, "--tokens", cfg, "tokens", corpus.tokens);
      cfg_default(corpus_cmd, "--fft", cfg, "fft_size", corpus.fft_size);
      cfg_default(corpus_cmd, "--window", cfg, "window_size", corpus.window_size);
      cfg_default(corpus_cmd, "--hop", cfg, "hop_size", corpus.hop_size);
      return run_corpus(corpus);
    }
    if (pre_cmd->parsed()) {
      const json cfg = load_config(pre.common.config_path);
      cfg_default(pre_cmd, "--layers", cfg, "layers", pre.layers);
      cfg_default(pre_cmd, "--channels", cfg, "channels", pre.channels);
      cfg_default(pre_cmd, "--epochs", cfg, "epochs", pre.epochs);
      cfg_default(pre_cmd, "--batch", cfg, "batch", pre.batch);
      cfg_default(pre_cmd, "--lr", cfg, "lr", pre.lr);
      cfg_default(pre_cmd, "--mask-ratio", cfg, "mask_ratio", pre.mask_ratio);
      return run_pretrain(pre);
    }
    if (fin_cmd->parsed()) {
      const json cfg = load_config(fin.common.config_path);
      cfg_default(fin_cmd, "--epochs", cfg, "epochs", fin.epochs);
      cfg_default(fin_cmd, "--batch", cfg, "batch", fin.batch);
      cfg_default(fin_cmd, "--lr", cfg, "lr", fin.lr);
      cfg_default(fin_cmd, "--train-frac", cfg, "train_frac", fin.train_frac);
      return run_finetune(fin);
    }
    if (base_cmd->parsed()) {
      const json cfg = load_config(base.common.config_path);
      cfg_default(base_cmd, "--layers", cfg, "layers", base.layers);
      cfg_default(base_cmd, "--channels", cfg, "channels", base.channels);
      cfg_default(base_cmd, "--epochs", cfg, "epochs", base.epochs);
      cfg_default(base_cmd, "--batch", cfg, "batch", base.batch);
      cfg_default(base_cmd, "--lr", cfg, "lr", base.lr);
      cfg_default(base_cmd, "--train-frac", cfg, "train_frac", base.train_frac);
      return run_baseline(base);
    }
    if (eval_cmd->parsed()) {
      const json cfg = load_config(ev.train.common.config_path);
      cfg_default(eval_cmd, "--blocks", cfg, "blocks", ev.blocks);
      cfg_default(eval_cmd, "--steps", cfg, "steps", ev.steps);
      cfg_default(eval_cmd, "--train-frac", cfg, "train_frac", ev.train.train_frac);
      cfg_default(eval_cmd, "--max-noise-dbm", cfg, "max_noise_dbm", ev.max_noise_dbm);
      return run_eval(ev);
    }
    if (plot_cmd->parsed()) return run_plot(plot);
    return 2;
  } catch (const CompatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
