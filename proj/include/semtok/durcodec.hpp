#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace semtok {

// Hard cap on run length: one duration token covers runs of 2..kDefaultMaxRun
// frames (roughly one second at 50 Hz), keeping the duration vocabulary small.
inline constexpr std::uint32_t kDefaultMaxRun = 48;

// One run of identical sound tokens.
struct Group {
  std::uint32_t sound = 0;
  std::uint32_t run = 1;

  bool operator==(const Group&) const = default;
};

// Run-length compressed sound-token sequence. Canonical form: a group may be
// followed by a group with the same sound only when its run equals the codec's
// max run (a forced split).
struct TokenStream {
  std::vector<Group> groups;

  bool operator==(const TokenStream&) const = default;
  bool empty() const { return groups.empty(); }
};

struct DurCodecConfig {
  std::uint32_t sound_count = 2048;  // valid sound ids are [0, sound_count)
  std::uint32_t max_run = kDefaultMaxRun;
};

// Replaces maximal runs of identical ids with (sound, run) groups; runs longer
// than max_run split greedily. Throws on an id outside [0, sound_count),
// naming the offending position.
TokenStream compress(std::span<const std::uint32_t> ids,
                     const DurCodecConfig& cfg);

// Exact inverse of compress. Throws on a run outside [1, max_run].
std::vector<std::uint32_t> decompress(const TokenStream& stream,
                                      const DurCodecConfig& cfg);

// Tokens the stream costs when rendered: one sound token per group plus one
// duration token per group with run >= 2.
std::size_t emitted_token_count(const TokenStream& stream);

// emitted_token_count / original_len. Throws when original_len == 0.
double compression_ratio(const TokenStream& stream, std::size_t original_len);

}  // namespace semtok
