#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "semtok/durcodec.hpp"
#include "semtok/rvq.hpp"

namespace semtok {

// Deterministic synthetic speaker: every character owns a unit-norm base
// vector and a duration, both functions of (character, seed) alone.
struct OracleConfig {
  std::size_t dim = 64;
  std::uint32_t min_duration = 2;
  std::uint32_t max_duration = 6;
  double noise_std = 0.0;
  std::uint64_t seed = 0;
  std::string alphabet = "abcdefghijklmnopqrstuvwxyz ";

  void validate() const;
  // The (base vector, duration) a character always produces.
  std::vector<float> base_vector(char32_t c) const;
  std::uint32_t duration(char32_t c) const;
};

// dur(c) copies of base(c) per character, plus per-coordinate Gaussian noise
// of std noise_std seeded by (seed, text): repeated calls are bit-identical.
FeatureSeq speak(const std::string& text, const OracleConfig& cfg);

// The reference acoustic route: speak, quantize at level 0, run-length
// compress. max_run caps duration groups as in the codec.
TokenStream speech_path(const std::string& text, const OracleConfig& cfg,
                        const Quantizer& q,
                        std::uint32_t max_run = kDefaultMaxRun);

struct Emission {
  std::uint32_t sound = 0;
  std::uint32_t duration = 1;
  bool operator==(const Emission&) const = default;
};

struct MapperDiagnostics {
  std::uint32_t iterations = 0;
  bool converged = false;
  std::uint64_t skipped_pairs = 0;
  // Total E-step alignment cost per iteration; non-increasing.
  std::vector<std::uint64_t> cost_per_iter;
};

struct MapperModel {
  std::u32string alphabet;  // sorted, unique
  std::map<char32_t, Emission> table;
  MapperDiagnostics diagnostics;

  std::uint64_t digest() const;
};

struct TrainPair {
  std::string text;
  TokenStream stream;
};

inline constexpr std::uint32_t kMaxMapperIters = 20;

// Iterative monotonic alignment: E-step assigns each pair's token groups to
// its characters in order (each character takes a non-empty contiguous span,
// dynamic programming, earliest split on ties); M-step re-votes each
// character's sound (majority, lowest id wins) and duration (median aligned
// run, lower middle). Pairs with fewer groups than characters are skipped and
// counted. Stops at a table fixpoint or kMaxMapperIters.
MapperModel train_mapper(std::span<const TrainPair> pairs,
                         const std::string& alphabet, unsigned threads = 0);

// Concatenates each character's learned group, then canonicalizes through
// decompress+compress so adjacent equal sounds merge.
TokenStream translate(const MapperModel& model, const std::string& text,
                      const DurCodecConfig& codec);

// Text table: header "mapperv1 <entries> <digest-hex16>", then one sorted
// line per character: codepoint hex, sound id, duration. Diagnostics are not
// persisted.
void save_mapper(const MapperModel& model, const std::string& path);
MapperModel load_mapper(const std::string& path);

}  // namespace semtok
