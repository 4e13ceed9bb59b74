#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace semtok {

// splitmix64 step; used for seed derivation so sub-streams are decorrelated.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  return splitmix64(splitmix64(seed) ^ salt);
}

// FNV-1a over bytes; used for content digests of configs and small files.
inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t state = 0xcbf29ce484222325ull) {
  for (unsigned char c : bytes) {
    state ^= c;
    state *= 0x100000001b3ull;
  }
  return state;
}

std::string hex64(std::uint64_t v);

// Unbiased integer in [0, n) via rejection sampling. mt19937_64 output is
// fully specified by the standard, so results are identical everywhere.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    std::uint64_t x = rng();
    if (x >= threshold) return x % n;
  }
}

// Uniform double in (0, 1].
inline double unit_double(std::mt19937_64& rng) {
  return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

// Box-Muller normal sampler. std::normal_distribution is implementation
// defined; this one produces the same stream on every platform.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : rng_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = unit_double(rng_);
    double u2 = unit_double(rng_);
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * 3.141592653589793238462643 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Runs fn(begin, end) over [0, n) split into contiguous chunks, one per
// thread. Each chunk writes only its own slots, so the result is identical
// for every thread count. threads == 0 picks hardware concurrency.
void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t, std::size_t)>& fn);

// -- UTF-8 ------------------------------------------------------------------

inline constexpr char32_t kReplacementChar = 0xFFFD;

// Decodes the codepoint starting at byte `pos`, advancing `pos`. Malformed
// sequences yield U+FFFD and advance one byte.
char32_t utf8_decode_next(std::string_view s, std::size_t& pos);

std::u32string utf8_decode(std::string_view s);

void utf8_append(std::string& out, char32_t cp);

std::string utf8_encode(std::u32string_view s);

}  // namespace semtok
