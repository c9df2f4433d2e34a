#include "speclearn/iq.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "speclearn/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "raw IQ I/O assumes a little-endian host");

namespace speclearn {

double IQRecording::mean_power_w() const {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& s : samples) {
    acc += static_cast<double>(s.real()) * s.real() + static_cast<double>(s.imag()) * s.imag();
  }
  return acc / static_cast<double>(samples.size());
}

namespace {

std::filesystem::path meta_path_for(const std::filesystem::path& iq_path) {
  std::filesystem::path p = iq_path;
  p.replace_extension(".meta");
  return p;
}

}  // namespace

void save_iq_recording(const IQRecording& rec, const std::filesystem::path& iq_path,
                       const std::optional<std::string>& capture_time) {
  std::ofstream f(iq_path, std::ios::binary);
  if (!f) throw FormatError("cannot open for writing: " + iq_path.string());
  if (!rec.samples.empty()) {
    f.write(reinterpret_cast<const char*>(rec.samples.data()),
            static_cast<std::streamsize>(rec.samples.size() * sizeof(std::complex<float>)));
  }
  if (!f) throw FormatError("short write: " + iq_path.string());

  std::ofstream m(meta_path_for(iq_path));
  if (!m) throw FormatError("cannot open for writing: " + meta_path_for(iq_path).string());
  m.precision(17);
  m << "sample_rate_hz=" << rec.sample_rate_hz << "\n";
  m << "center_freq_hz=" << rec.center_freq_hz << "\n";
  if (capture_time) m << "capture_time=" << *capture_time << "\n";
}

IQRecording load_iq_recording(const std::filesystem::path& iq_path) {
  std::ifstream f(iq_path, std::ios::binary | std::ios::ate);
  if (!f) throw FormatError("cannot open: " + iq_path.string());
  const auto bytes = static_cast<size_t>(f.tellg());
  if (bytes % (2 * sizeof(float)) != 0) {
    throw FormatError("payload size " + std::to_string(bytes) +
                      " is not a whole number of I,Q float pairs: " + iq_path.string());
  }
  f.seekg(0);

  IQRecording rec;
  rec.samples.resize(bytes / (2 * sizeof(float)));
  if (!rec.samples.empty()) {
    f.read(reinterpret_cast<char*>(rec.samples.data()), static_cast<std::streamsize>(bytes));
    if (!f) throw FormatError("short read: " + iq_path.string());
  }

  const auto mpath = meta_path_for(iq_path);
  std::ifstream m(mpath);
  if (!m) throw FormatError("missing sidecar manifest: " + mpath.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(m, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("bad manifest line '" + line + "' in " + mpath.string());
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  for (const char* key : {"sample_rate_hz", "center_freq_hz"}) {
    if (!kv.count(key)) {
      throw FormatError(std::string("manifest missing required key '") + key + "': " + mpath.string());
    }
  }
  try {
    rec.sample_rate_hz = std::stod(kv["sample_rate_hz"]);
    rec.center_freq_hz = std::stod(kv["center_freq_hz"]);
  } catch (const std::exception&) {
    throw FormatError("non-numeric manifest value in " + mpath.string());
  }
  if (rec.sample_rate_hz <= 0.0) throw FormatError("sample_rate_hz must be positive: " + mpath.string());
  return rec;
}

}  // namespace speclearn
