#ifndef VIDEC_HASH_HPP
#define VIDEC_HASH_HPP

#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <string_view>

namespace videc {

/// 64-bit FNV-1a, used for config fingerprints and content digests.
class Fnv1a64 {
public:
  void update(std::span<const unsigned char> bytes) noexcept {
    for (unsigned char b : bytes) {
      state_ ^= b;
      state_ *= 0x100000001b3ULL;
    }
  }

  void update(std::string_view s) noexcept {
    update(std::span(reinterpret_cast<const unsigned char *>(s.data()), s.size()));
  }

  std::uint64_t digest() const noexcept { return state_; }

  std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(state_));
    return buf;
  }

private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline std::string fnv1a_hex(std::string_view s) {
  Fnv1a64 h;
  h.update(s);
  return h.hex();
}

} // namespace videc

#endif // VIDEC_HASH_HPP
