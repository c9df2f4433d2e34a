// End-to-end checks of the command-line tool: exit codes, artifact layout,
// and rerun determinism. Drives the installed binary via std::system.

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

#ifndef SPECLEARN_CLI_PATH
#error "SPECLEARN_CLI_PATH must point at the speclearn binary"
#endif

const std::string kCli = SPECLEARN_CLI_PATH;

int run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string file_bytes(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string sub(const std::string& s) const { return (path / s).string(); }
};

}  // namespace

TEST_CASE("usage exit codes") {
  CHECK(run("--help") == 0);
  CHECK(run("synth --help") == 0);
  CHECK(run("--definitely-not-a-flag") == 2);
  CHECK(run("synth --definitely-not-a-flag --out /tmp/x") == 2);
  CHECK(run("") == 2);  // a subcommand is required
}

TEST_CASE("synth rejects bad configs without leaving a manifest") {
  TempDir tmp("speclearn_cli_synth");
  // band rate incompatible with the subcarrier grid
  CHECK(run("synth --kind seg --out " + tmp.sub("bad") + " --band-fs 12345678 --count 2") == 2);
  CHECK(!fs::exists(tmp.path / "bad" / "manifest.json"));

  CHECK(run("synth --kind seg --out " + tmp.sub("bad2") + " --count 0") == 2);
  CHECK(run("synth --kind bogus --out " + tmp.sub("bad3")) == 2);
}

TEST_CASE("corpus failure modes") {
  TempDir tmp("speclearn_cli_corpus");
  fs::create_directories(tmp.path / "empty");
  CHECK(run("corpus --input " + tmp.sub("empty") + " --out " + tmp.sub("c")) == 2);
  CHECK(run("corpus --input " + tmp.sub("missing_dir") + " --out " + tmp.sub("c")) == 2);
}

TEST_CASE("config file fills in unset flags, command line wins") {
  TempDir tmp("speclearn_cli_config");
  {
    std::ofstream f(tmp.path / "cfg.json");
    f << R"({"count": 2, "duration_ms": 30.0})";
  }
  // count comes from the config; seed from the flag
  REQUIRE(run("synth --kind iq --out " + tmp.sub("a") + " --config " + tmp.sub("cfg.json") +
              " --fs 7680000 --seed 5") == 0);
  CHECK(fs::exists(tmp.path / "a" / "rec_1.iq"));
  CHECK(!fs::exists(tmp.path / "a" / "rec_2.iq"));

  // an explicit flag overrides the config value
  REQUIRE(run("synth --kind iq --out " + tmp.sub("b") + " --config " + tmp.sub("cfg.json") +
              " --fs 7680000 --seed 5 --count 1") == 0);
  CHECK(fs::exists(tmp.path / "b" / "rec_0.iq"));
  CHECK(!fs::exists(tmp.path / "b" / "rec_1.iq"));

  CHECK(run("synth --kind iq --out " + tmp.sub("c") + " --config " + tmp.sub("nope.json") +
            " --fs 7680000") == 2);
}

TEST_CASE("training commands validate their inputs") {
  TempDir tmp("speclearn_cli_train");
  CHECK(run("finetune --ckpt " + tmp.sub("nope.bin") + " --task forecast --corpus x --out " +
            tmp.sub("o")) == 2);
  CHECK(run("eval --ckpt " + tmp.sub("nope.bin") + " --task forecast --corpus x --out " +
            tmp.sub("o")) == 2);
  CHECK(run("plot --report " + tmp.sub("nope.json") + " --out " + tmp.sub("o")) == 2);
}

TEST_CASE("pipeline reruns are byte-identical and digest mismatches exit 3") {
  TempDir tmp("speclearn_cli_pipe");

  const std::string synth_args =
      " --kind iq --count 3 --duration-ms 40 --fs 7680000 --seed 5 --jobs 2";
  REQUIRE(run("synth --out " + tmp.sub("iq") + synth_args) == 0);
  REQUIRE(run("synth --out " + tmp.sub("iq_again") + synth_args) == 0);
  CHECK(file_bytes(tmp.path / "iq" / "rec_0.iq") == file_bytes(tmp.path / "iq_again" / "rec_0.iq"));

  REQUIRE(run("corpus --input " + tmp.sub("iq") + " --out " + tmp.sub("corpus") +
              " --sentences 12 --image-size 32 --seed 5") == 0);
  REQUIRE(run("pretrain --corpus " + tmp.sub("corpus") + " --out " + tmp.sub("pre") +
              " --layers 1 --channels 4 --epochs 1 --batch 4 --seed 5") == 0);
  CHECK(fs::exists(tmp.path / "pre" / "ckpt_msm.bin"));
  CHECK(fs::exists(tmp.path / "pre" / "train_msm.log"));
  CHECK(fs::exists(tmp.path / "pre" / "config_resolved.json"));

  REQUIRE(run("finetune --ckpt " + tmp.sub("pre") + "/ckpt_msm.bin --task forecast --corpus " +
              tmp.sub("corpus") + " --out " + tmp.sub("fin") + " --epochs 1 --batch 4 --seed 5") == 0);
  REQUIRE(run("eval --ckpt " + tmp.sub("fin") + "/ckpt_forecast.bin --task forecast --corpus " +
              tmp.sub("corpus") + " --out " + tmp.sub("ev") +
              " --blocks 1msx1mhz --steps 4 --seed 5") == 0);
  CHECK(fs::exists(tmp.path / "ev" / "occupancy_report.json"));
  CHECK(fs::exists(tmp.path / "ev" / "fig_occupancy_recall.svg"));

  // plot re-renders the stored report
  REQUIRE(run("plot --report " + tmp.sub("ev") + "/occupancy_report.json --out " +
              tmp.sub("plots")) == 0);
  CHECK(fs::exists(tmp.path / "plots" / "fig_occupancy_recall.svg"));

  // a corpus with different preprocessing is rejected with exit 3
  REQUIRE(run("corpus --input " + tmp.sub("iq") + " --out " + tmp.sub("corpus64") +
              " --sentences 4 --image-size 64 --seed 5") == 0);
  CHECK(run("finetune --ckpt " + tmp.sub("pre") + "/ckpt_msm.bin --task forecast --corpus " +
            tmp.sub("corpus64") + " --out " + tmp.sub("fin2") + " --epochs 1 --seed 5") == 3);
}

TEST_CASE("segmentation leg: synth, finetune, eval, plot") {
  TempDir tmp("speclearn_cli_seg");

  REQUIRE(run("synth --kind iq --out " + tmp.sub("iq") +
              " --count 2 --duration-ms 40 --fs 7680000 --seed 9") == 0);
  REQUIRE(run("corpus --input " + tmp.sub("iq") + " --out " + tmp.sub("corpus") +
              " --sentences 8 --image-size 32 --seed 9") == 0);
  REQUIRE(run("pretrain --corpus " + tmp.sub("corpus") + " --out " + tmp.sub("pre") +
              " --layers 1 --channels 4 --seg-hidden 2 --epochs 1 --batch 4 --seed 9") == 0);

  REQUIRE(run("synth --kind seg --out " + tmp.sub("seg_train") +
              " --count 4 --image-size 32 --split train --seed 10 --jobs 2 --subframes 10") == 0);
  REQUIRE(run("synth --kind seg --out " + tmp.sub("seg_test") +
              " --count 2 --image-size 32 --split test --seed 11 --jobs 2 --subframes 10") == 0);

  REQUIRE(run("finetune --ckpt " + tmp.sub("pre") + "/ckpt_msm.bin --task segment --data " +
              tmp.sub("seg_train") + " --out " + tmp.sub("seg_fin") +
              " --epochs 1 --batch 2 --seed 9") == 0);
  REQUIRE(run("eval --ckpt " + tmp.sub("seg_fin") + "/ckpt_segment.bin --task segment --data " +
              tmp.sub("seg_test") + " --out " + tmp.sub("seg_ev") + " --seed 9") == 0);
  CHECK(fs::exists(tmp.path / "seg_ev" / "confusion_report.json"));
  CHECK(fs::exists(tmp.path / "seg_ev" / "fig_confusion_full.svg"));
  CHECK(fs::exists(tmp.path / "seg_ev" / "fig_confusion_binary.svg"));

  REQUIRE(run("plot --report " + tmp.sub("seg_ev") + "/confusion_report.json --out " +
              tmp.sub("plots")) == 0);
  CHECK(fs::exists(tmp.path / "plots" / "fig_confusion_full.svg"));

  // train from scratch on the same data (the comparator path)
  REQUIRE(run("baseline --task segment --data " + tmp.sub("seg_train") + " --out " +
              tmp.sub("seg_base") + " --layers 1 --channels 4 --seg-hidden 2 --epochs 1 "
              "--batch 2 --seed 9") == 0);
  CHECK(fs::exists(tmp.path / "seg_base" / "ckpt_baseline_segment.bin"));
}
