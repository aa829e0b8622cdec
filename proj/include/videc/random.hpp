#ifndef VIDEC_RANDOM_HPP
#define VIDEC_RANDOM_HPP

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace videc {

/// Independent 64-bit seed for a (base seed, stream tag, index...) tuple.
/// std::seed_seq's mixing is fully specified, so derived streams are stable
/// across standard libraries.
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags) {
  std::vector<std::uint32_t> words{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32)};
  for (auto t : tags) {
    words.push_back(static_cast<std::uint32_t>(t));
    words.push_back(static_cast<std::uint32_t>(t >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

inline std::mt19937_64 make_rng(std::uint64_t base, std::initializer_list<std::uint64_t> tags) {
  return std::mt19937_64(derive_seed(base, tags));
}

} // namespace videc

#endif // VIDEC_RANDOM_HPP
