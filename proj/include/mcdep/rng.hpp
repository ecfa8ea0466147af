#ifndef MCDEP_RNG_HPP_
#define MCDEP_RNG_HPP_

#include <cstdint>
#include <limits>
#include <string_view>

namespace mcdep {

inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Counter-based stream: the i-th output is a pure function of (key, i), so a
// stream can be derived from any tuple of identifiers and replayed anywhere.
// Output sequence for a key is the SplitMix64 sequence seeded by that key.
class CounterRng {
 public:
  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  explicit constexpr CounterRng(std::uint64_t key) : key_(key) {}

  // Stream for sample `index` of sentence `sentence_id` under `seed`.
  static constexpr CounterRng for_sample(std::uint64_t seed, std::string_view sentence_id,
                                         std::uint64_t index) {
    std::uint64_t k = mix64(seed ^ 0x6A09E667F3BCC908ULL);
    k = mix64(k ^ fnv1a64(sentence_id));
    k = mix64(k ^ (index * 0x9E3779B97F4A7C15ULL + 0x3C6EF372FE94F82BULL));
    return CounterRng(k);
  }

  constexpr result_type operator()() {
    ++counter_;
    return mix64(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
  }

  // Uniform in [0, 1) with 53 random bits.
  constexpr double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound) by rejection, bound > 0.
  constexpr std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = max() - max() % bound;
    std::uint64_t x;
    do {
      x = (*this)();
    } while (x >= limit);
    return x % bound;
  }

  constexpr std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace mcdep

#endif  // MCDEP_RNG_HPP_
