#include "speclearn/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "speclearn/digest.hpp"
#include "speclearn/errors.hpp"

namespace speclearn {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'S', 'L', 'R', 'N', 'C', 'K', 'P', 'T'};

json config_to_json(const ModelConfig& c) {
  return json{{"layers", c.layers},
              {"channels", c.channels},
              {"kernel", c.kernel},
              {"peephole", c.peephole},
              {"input_channels", c.input_channels},
              {"token_height", c.token_height},
              {"token_width", c.token_width},
              {"tokens_per_sentence", c.tokens_per_sentence},
              {"seg_classes", c.seg_classes},
              {"seg_hidden", c.seg_hidden}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.layers = j.at("layers").get<int>();
  c.channels = j.at("channels").get<int>();
  c.kernel = j.at("kernel").get<int>();
  c.peephole = j.at("peephole").get<bool>();
  c.input_channels = j.at("input_channels").get<int>();
  c.token_height = j.at("token_height").get<int64_t>();
  c.token_width = j.at("token_width").get<int64_t>();
  c.tokens_per_sentence = j.at("tokens_per_sentence").get<int64_t>();
  c.seg_classes = j.at("seg_classes").get<int>();
  c.seg_hidden = j.at("seg_hidden").get<int>();
  return c;
}

template <typename T>
void write_pod(std::ofstream& f, const T& v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T read_pod(std::ifstream& f) {
  T v{};
  f.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!f) throw FormatError("truncated checkpoint");
  return v;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open checkpoint for writing: " + path.string());

  f.write(kMagic, sizeof kMagic);
  write_pod(f, ckpt.version);
  write_pod(f, ckpt.preprocessing_digest);

  const std::string cfg = config_to_json(ckpt.params.cfg).dump();
  write_pod(f, static_cast<uint32_t>(cfg.size()));
  f.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));

  uint32_t count = 0;
  ckpt.params.for_each([&](const std::string&, const Tensor<float>&) { ++count; });
  write_pod(f, count);

  Fnv64 payload_digest;
  ckpt.params.for_each([&](const std::string& name, const Tensor<float>& t) {
    write_pod(f, static_cast<uint16_t>(name.size()));
    f.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_pod(f, static_cast<uint8_t>(ckpt.params.trainable(name) ? 1 : 0));
    write_pod(f, static_cast<uint8_t>(t.rank()));
    for (int i = 0; i < t.rank(); ++i) write_pod(f, t.dim(i));
    f.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.size() * 4));
    payload_digest.update(t.data(), static_cast<size_t>(t.size()) * 4);
  });
  write_pod(f, payload_digest.value());
  if (!f) throw FormatError("short write: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open checkpoint: " + path.string());

  char magic[8];
  f.read(magic, sizeof magic);
  if (!f || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw FormatError("not a checkpoint file: " + path.string());
  }
  Checkpoint ckpt;
  ckpt.version = read_pod<uint32_t>(f);
  if (ckpt.version > kCheckpointVersion) {
    throw CompatError("checkpoint version " + std::to_string(ckpt.version) +
                      " is newer than supported version " + std::to_string(kCheckpointVersion));
  }
  ckpt.preprocessing_digest = read_pod<uint64_t>(f);

  const auto cfg_len = read_pod<uint32_t>(f);
  std::string cfg_str(cfg_len, '\0');
  f.read(cfg_str.data(), cfg_len);
  if (!f) throw FormatError("truncated checkpoint config");
  ModelConfig cfg;
  try {
    cfg = config_from_json(json::parse(cfg_str));
  } catch (const json::exception& e) {
    throw FormatError("bad checkpoint config: " + std::string(e.what()));
  }
  ckpt.params = ModelParams<float>::shaped(cfg);

  const auto count = read_pod<uint32_t>(f);
  Fnv64 payload_digest;
  std::map<std::string, std::pair<std::vector<int64_t>, std::vector<float>>> table;
  std::map<std::string, bool> trainable;
  for (uint32_t i = 0; i < count; ++i) {
    const auto name_len = read_pod<uint16_t>(f);
    std::string name(name_len, '\0');
    f.read(name.data(), name_len);
    const bool is_trainable = read_pod<uint8_t>(f) != 0;
    const auto ndim = read_pod<uint8_t>(f);
    std::vector<int64_t> dims(ndim);
    int64_t numel = 1;
    for (auto& d : dims) {
      d = read_pod<int64_t>(f);
      numel *= d;
    }
    std::vector<float> payload(static_cast<size_t>(numel));
    f.read(reinterpret_cast<char*>(payload.data()), numel * 4);
    if (!f) throw FormatError("truncated checkpoint payload");
    payload_digest.update(payload.data(), static_cast<size_t>(numel) * 4);
    table[name] = {std::move(dims), std::move(payload)};
    trainable[name] = is_trainable;
  }
  const auto stored = read_pod<uint64_t>(f);
  if (stored != payload_digest.value()) {
    throw FormatError("checkpoint payload checksum mismatch (corrupted file)");
  }

  ckpt.params.for_each([&](const std::string& name, Tensor<float>& t) {
    const auto it = table.find(name);
    if (it == table.end()) throw FormatError("checkpoint missing parameter " + name);
    if (it->second.first != t.shape()) throw FormatError("checkpoint shape mismatch for " + name);
    std::copy(it->second.second.begin(), it->second.second.end(), t.data());
    if (!trainable[name]) ckpt.params.frozen.insert(name);
  });
  return ckpt;
}

uint64_t backbone_digest(const ModelParams<float>& params) {
  Fnv64 d;
  params.for_each([&](const std::string& name, const Tensor<float>& t) {
    if (name.rfind("backbone.", 0) == 0) {
      d.update_str(name);
      d.update(t.data(), static_cast<size_t>(t.size()) * 4);
    }
  });
  return d.value();
}

}  // namespace speclearn
