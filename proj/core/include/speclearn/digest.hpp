#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <string_view>

namespace speclearn {

// Incremental FNV-1a (64-bit). Used for preprocessing-config digests and
// checkpoint payload checksums; not cryptographic.
class Fnv64 {
 public:
  void update(const void* data, size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 0x100000001B3ull;
    }
  }

  void update_str(std::string_view s) {
    update(s.data(), s.size());
    update_u64(s.size());  // length separator avoids concatenation collisions
  }

  void update_u64(uint64_t v) { update(&v, sizeof v); }
  void update_i64(int64_t v) { update_u64(static_cast<uint64_t>(v)); }
  void update_f64(double v) { update_u64(std::bit_cast<uint64_t>(v)); }

  uint64_t value() const { return h_; }

 private:
  uint64_t h_ = 0xCBF29CE484222325ull;
};

inline uint64_t fnv64(const void* data, size_t n) {
  Fnv64 f;
  f.update(data, n);
  return f.value();
}

}  // namespace speclearn
