#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "oracle_helpers.hpp"
#include "speclearn/checkpoint.hpp"
#include "speclearn/errors.hpp"
#include "speclearn/model.hpp"
#include "speclearn/rng.hpp"

using namespace speclearn;
namespace fs = std::filesystem;

namespace {

Tensor<float> random_tensor(std::vector<int64_t> shape, uint64_t seed) {
  Tensor<float> t(std::move(shape));
  Rng rng(seed);
  for (int64_t i = 0; i < t.size(); ++i) t[i] = static_cast<float>(rng.normal());
  return t;
}

}  // namespace

TEST_CASE("cell zero fixed point") {
  ModelConfig cfg;
  cfg.layers = 1;
  cfg.channels = 4;
  cfg.token_height = 8;
  cfg.token_width = 8;
  const auto params = ModelParams<float>::shaped(cfg);  // all zeros
  LayerState<float> state;
  const Tensor<float> x = random_tensor({1, 8, 8}, 1);
  const Tensor<float> h = convlstm_cell_forward(x, state, params.layers[0], cfg.peephole);
  for (int64_t i = 0; i < h.size(); ++i) CHECK(h[i] == 0.0f);
  for (int64_t i = 0; i < state.c.size(); ++i) CHECK(state.c[i] == 0.0f);
}

TEST_CASE("cell output shape with 64 kernels") {
  ModelConfig cfg;
  cfg.layers = 1;
  cfg.channels = 64;
  cfg.token_height = 8;
  cfg.token_width = 8;
  const auto params = init_weights<float>(cfg, 2);
  LayerState<float> state;
  const Tensor<float> x = random_tensor({1, 8, 8}, 3);
  const Tensor<float> h = convlstm_cell_forward(x, state, params.layers[0], cfg.peephole);
  CHECK(h.shape() == std::vector<int64_t>{64, 8, 8});

  const Tensor<float> bad = random_tensor({2, 8, 8}, 4);
  LayerState<float> s2;
  CHECK_THROWS_AS(convlstm_cell_forward(bad, s2, params.layers[0], cfg.peephole), DimensionError);
}

TEST_CASE("1x1 spatial cell equals a scalar LSTM step") {
  ModelConfig cfg;
  cfg.layers = 1;
  cfg.channels = 1;
  cfg.token_height = 1;
  cfg.token_width = 1;
  auto params = init_weights<float>(cfg, 5);
  Rng rng(6);
  // make every parameter (incl. bias maps and peepholes) nonzero
  params.for_each([&](const std::string&, Tensor<float>& t) {
    for (int64_t i = 0; i < t.size(); ++i) t[i] = static_cast<float>(rng.normal(0.0, 0.5));
  });

  // with same padding on a 1x1 image only the kernel center contributes
  const auto center = [](const Tensor<float>& k) { return static_cast<double>(k.at(0, 0, 1, 1)); };
  const auto& lp = params.layers[0];
  oracle::ScalarLstmWeights w{};
  w.wxi = center(lp.w_x[kGateI]);
  w.whi = center(lp.w_h[kGateI]);
  w.pci = lp.peep[0][0];
  w.bi = lp.bias[kGateI][0];
  w.wxf = center(lp.w_x[kGateF]);
  w.whf = center(lp.w_h[kGateF]);
  w.pcf = lp.peep[1][0];
  w.bf = lp.bias[kGateF][0];
  w.wxg = center(lp.w_x[kGateG]);
  w.whg = center(lp.w_h[kGateG]);
  w.bg = lp.bias[kGateG][0];
  w.wxo = center(lp.w_x[kGateO]);
  w.who = center(lp.w_h[kGateO]);
  w.pco = lp.peep[2][0];
  w.bo = lp.bias[kGateO][0];

  LayerState<float> state;
  double h_ref = 0.0, c_ref = 0.0;
  for (int step = 0; step < 5; ++step) {
    Tensor<float> x({1, 1, 1});
    x[0] = static_cast<float>(rng.normal());
    const Tensor<float> h = convlstm_cell_forward(x, state, lp, cfg.peephole);
    std::tie(h_ref, c_ref) = oracle::scalar_lstm_step(w, x[0], h_ref, c_ref);
    CHECK(h[0] == doctest::Approx(h_ref).epsilon(1e-4));
    CHECK(state.c[0] == doctest::Approx(c_ref).epsilon(1e-4));
  }
}

TEST_CASE("backbone shapes, zeros and causality") {
  ModelConfig cfg;
  cfg.layers = 3;
  cfg.channels = 6;
  cfg.token_height = 8;
  cfg.token_width = 4;
  cfg.tokens_per_sentence = 5;

  SUBCASE("shape contract and zero params") {
    const auto zero_params = ModelParams<float>::shaped(cfg);
    const Tensor<float> tokens = random_tensor({2, 5, 1, 8, 4}, 7);
    const Tensor<float> feats = backbone_forward(zero_params, tokens);
    CHECK(feats.shape() == std::vector<int64_t>{2, 5, 6, 8, 4});
    for (int64_t i = 0; i < feats.size(); ++i) CHECK(feats[i] == 0.0f);
  }

  SUBCASE("causality: longer input preserves the prefix") {
    const auto params = init_weights<float>(cfg, 8);
    const ConvLstmStack<float> stack(params);
    const Tensor<float> x10 = random_tensor({10, 1, 8, 4}, 9);
    Tensor<float> x5({5, 1, 8, 4});
    std::copy(x10.data(), x10.data() + x5.size(), x5.data());
    const Tensor<float> f10 = stack.forward(x10, nullptr);
    const Tensor<float> f5 = stack.forward(x5, nullptr);
    for (int64_t i = 0; i < f5.size(); ++i) CHECK(f10[i] == f5[i]);

    // perturbing a later token leaves earlier outputs untouched
    Tensor<float> x10b = x10;
    for (int64_t j = 0; j < 1 * 8 * 4; ++j) x10b[7 * 8 * 4 + j] += 1.0f;
    const Tensor<float> f10b = stack.forward(x10b, nullptr);
    for (int64_t i = 0; i < 7 * 6 * 8 * 4; ++i) CHECK(f10b[i] == f10[i]);
  }

  SUBCASE("empty sequence") {
    const auto params = init_weights<float>(cfg, 8);
    const ConvLstmStack<float> stack(params);
    Tensor<float> empty({0, 1, 8, 4});
    CHECK_THROWS_AS(stack.forward(empty, nullptr), DataError);
  }

  SUBCASE("deterministic forward") {
    const auto params = init_weights<float>(cfg, 8);
    const ConvLstmStack<float> stack(params);
    const Tensor<float> x = random_tensor({4, 1, 8, 4}, 10);
    const Tensor<float> a = stack.forward(x, nullptr);
    const Tensor<float> b = stack.forward(x, nullptr);
    for (int64_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  }
}

TEST_CASE("reconstruction head") {
  ModelConfig cfg;
  cfg.layers = 1;
  cfg.channels = 4;
  cfg.token_height = 8;
  cfg.token_width = 4;
  cfg.tokens_per_sentence = 6;
  auto params = init_weights<float>(cfg, 11);
  const Tensor<float> feats = random_tensor({3, 6, 4, 8, 4}, 12);

  SUBCASE("shape matches the token layout") {
    const Tensor<float> out = msm_head_forward(params, feats);
    CHECK(out.shape() == std::vector<int64_t>{3, 6, 1, 8, 4});
  }

  SUBCASE("zero kernel gives the bias everywhere") {
    params.msm_kernel.fill(0.0f);
    params.msm_bias[0] = 2.5f;
    const Tensor<float> out = msm_head_forward(params, feats);
    for (int64_t i = 0; i < out.size(); ++i) CHECK(out[i] == 2.5f);
  }

  SUBCASE("linearity with zero bias") {
    params.msm_bias[0] = 0.0f;
    Tensor<float> scaled(feats.shape());
    for (int64_t i = 0; i < feats.size(); ++i) scaled[i] = 3.0f * feats[i];
    const Tensor<float> a = msm_head_forward(params, feats);
    const Tensor<float> b = msm_head_forward(params, scaled);
    for (int64_t i = 0; i < a.size(); ++i) {
      CHECK(b[i] == doctest::Approx(3.0f * a[i]).epsilon(1e-4));
    }
  }
}

TEST_CASE("forecast head takes the initial output token") {
  ModelConfig cfg;
  cfg.layers = 1;
  cfg.channels = 4;
  cfg.token_height = 8;
  cfg.token_width = 4;
  auto params = init_weights<float>(cfg, 13);
  const Tensor<float> feats = random_tensor({2, 5, 4, 8, 4}, 14);

  const Tensor<float> fc = forecast_head_forward(params, feats);
  CHECK(fc.shape() == std::vector<int64_t>{2, 1, 8, 4});

  // with shared weights it equals the reconstruction head sliced at t = 0
  params.msm_kernel = params.forecast_kernel;
  params.msm_bias = params.forecast_bias;
  const Tensor<float> full = msm_head_forward(params, feats);
  for (int64_t s = 0; s < 2; ++s) {
    for (int64_t j = 0; j < 8 * 4; ++j) {
      CHECK(fc[s * 8 * 4 + j] == full[s * 5 * 8 * 4 + j]);
    }
  }

  params.forecast_kernel.fill(0.0f);
  params.forecast_bias.fill(0.0f);
  const Tensor<float> zero = forecast_head_forward(params, feats);
  for (int64_t i = 0; i < zero.size(); ++i) CHECK(zero[i] == 0.0f);
}

TEST_CASE("segmentation head") {
  ModelConfig cfg;
  cfg.layers = 1;
  cfg.channels = 8;
  cfg.token_height = 256;
  cfg.token_width = 16;
  cfg.tokens_per_sentence = 16;
  cfg.seg_hidden = 4;
  auto params = init_weights<float>(cfg, 15);

  SUBCASE("full-size output shape and softmax normalization") {
    const Tensor<float> feats = random_tensor({1, 16, 8, 256, 16}, 16);
    const Tensor<float> probs = segmentation_head_forward(params, feats);
    CHECK(probs.shape() == std::vector<int64_t>{1, 3, 256, 256});
    for (int64_t j = 0; j < 256 * 256; ++j) {
      const double sum = static_cast<double>(probs[j]) + probs[256 * 256 + j] +
                         probs[2 * 256 * 256 + j];
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
      for (int64_t c = 0; c < 3; ++c) {
        CHECK(probs[c * 256 * 256 + j] > 0.0f);
        CHECK(probs[c * 256 * 256 + j] < 1.0f);
      }
    }
  }

  SUBCASE("zero weights give uniform class probabilities") {
    ModelConfig small = cfg;
    small.token_height = 16;
    small.token_width = 4;
    auto zero_params = ModelParams<float>::shaped(small);
    const Tensor<float> feats = random_tensor({1, 16, 8, 16, 4}, 17);
    const Tensor<float> probs = segmentation_head_forward(zero_params, feats);
    for (int64_t i = 0; i < probs.size(); ++i) {
      CHECK(probs[i] == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
    }
  }

  SUBCASE("wrong token count") {
    const Tensor<float> feats = random_tensor({1, 12, 8, 256, 16}, 18);
    CHECK_THROWS_AS(segmentation_head_forward(params, feats), DimensionError);
  }
}

TEST_CASE("weight initialization") {
  ModelConfig cfg;
  cfg.layers = 2;
  cfg.channels = 4;
  cfg.token_height = 8;
  cfg.token_width = 4;

  const auto a = init_weights<float>(cfg, 99);
  const auto b = init_weights<float>(cfg, 99);
  bool identical = true;
  std::vector<const Tensor<float>*> flat;
  b.for_each([&](const std::string&, const Tensor<float>& t) { flat.push_back(&t); });
  size_t idx = 0;
  a.for_each([&](const std::string&, const Tensor<float>& t) {
    const Tensor<float>& other = *flat[idx++];
    for (int64_t i = 0; i < t.size(); ++i) {
      if (t[i] != other[i]) identical = false;
    }
  });
  CHECK(identical);

  // kernel bound: |w| <= sqrt(6 / fan_in)
  const double bound_x0 = std::sqrt(6.0 / (1 * 9));
  for (int g = 0; g < 4; ++g) {
    for (int64_t i = 0; i < a.layers[0].w_x[static_cast<size_t>(g)].size(); ++i) {
      CHECK(std::abs(a.layers[0].w_x[static_cast<size_t>(g)][i]) <= bound_x0);
    }
  }
  const double bound_h = std::sqrt(6.0 / (4 * 9));
  for (int64_t i = 0; i < a.layers[1].w_h[0].size(); ++i) {
    CHECK(std::abs(a.layers[1].w_h[0][i]) <= bound_h);
  }

  // forget-gate bias map is all ones, other biases and peepholes zero
  for (int64_t i = 0; i < a.layers[0].bias[kGateF].size(); ++i) {
    CHECK(a.layers[0].bias[kGateF][i] == 1.0f);
  }
  for (int64_t i = 0; i < a.layers[0].bias[kGateI].size(); ++i) {
    CHECK(a.layers[0].bias[kGateI][i] == 0.0f);
  }
  for (int g = 0; g < 3; ++g) {
    for (int64_t i = 0; i < a.layers[0].peep[static_cast<size_t>(g)].size(); ++i) {
      CHECK(a.layers[0].peep[static_cast<size_t>(g)][i] == 0.0f);
    }
  }
}

TEST_CASE("freeze marks the backbone only") {
  ModelConfig cfg;
  cfg.layers = 2;
  cfg.channels = 4;
  cfg.token_height = 8;
  cfg.token_width = 4;
  auto params = init_weights<float>(cfg, 20);
  freeze_backbone(params);
  params.for_each([&](const std::string& name, Tensor<float>&) {
    if (name.rfind("backbone.", 0) == 0) {
      CHECK(!params.trainable(name));
    } else {
      CHECK(params.trainable(name));
    }
  });
}

TEST_CASE("checkpoint round trip") {
  const fs::path dir = fs::temp_directory_path() / "speclearn_ckpt_test";
  fs::create_directories(dir);

  ModelConfig cfg;
  cfg.layers = 2;
  cfg.channels = 4;
  cfg.token_height = 8;
  cfg.token_width = 4;
  Checkpoint ckpt;
  ckpt.params = init_weights<float>(cfg, 21);
  freeze_backbone(ckpt.params);
  ckpt.preprocessing_digest = 0xDEADBEEF12345678ull;

  const fs::path p1 = dir / "a.bin";
  const fs::path p2 = dir / "b.bin";
  save_checkpoint(ckpt, p1);
  const Checkpoint loaded = load_checkpoint(p1);
  CHECK(loaded.preprocessing_digest == ckpt.preprocessing_digest);
  CHECK(loaded.params.cfg == cfg);
  CHECK(loaded.params.frozen == ckpt.params.frozen);
  save_checkpoint(loaded, p2);

  std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
  const std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  const std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(b1 == b2);

  SUBCASE("payload corruption is detected") {
    std::string corrupted = b1;
    corrupted[corrupted.size() / 2] ^= 0x40;
    const fs::path pc = dir / "corrupt.bin";
    std::ofstream(pc, std::ios::binary).write(corrupted.data(), static_cast<std::streamsize>(corrupted.size()));
    CHECK_THROWS_AS(load_checkpoint(pc), FormatError);
  }

  SUBCASE("newer version is rejected") {
    std::string newer = b1;
    newer[8] = 99;  // version field follows the 8-byte magic
    const fs::path pv = dir / "newer.bin";
    std::ofstream(pv, std::ios::binary).write(newer.data(), static_cast<std::streamsize>(newer.size()));
    CHECK_THROWS_AS(load_checkpoint(pv), CompatError);
  }

  fs::remove_all(dir);
}
