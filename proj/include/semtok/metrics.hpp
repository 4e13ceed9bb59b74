#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "semtok/durcodec.hpp"

namespace semtok {

// Counts from a minimal-cost edit alignment of hypothesis against reference.
// rate = (S + I + D) / reference_length and may exceed 1.
struct ErrorRateReport {
  std::uint64_t substitutions = 0;
  std::uint64_t insertions = 0;
  std::uint64_t deletions = 0;
  std::uint64_t reference_length = 0;
  double rate = 0.0;

  std::uint64_t distance() const {
    return substitutions + insertions + deletions;
  }
};

// Lowercases, removes every codepoint that is not a letter, digit or
// whitespace, collapses whitespace runs to single spaces and trims.
// Idempotent.
std::string normalize(std::string_view text);

// Word-level error rate over space-split tokens of the normalized inputs.
// Throws when the normalized reference is empty.
ErrorRateReport wer(std::string_view ref, std::string_view hyp);

// Character-level error rate over normalized text, inter-word single spaces
// included. Throws when the normalized reference is empty.
ErrorRateReport cer(std::string_view ref, std::string_view hyp);

// Token-level error rate over decompressed sound-id sequences. Throws when
// the reference decompresses to nothing.
ErrorRateReport ter(const TokenStream& ref, const TokenStream& hyp);

// Pools counts across per-utterance reports. Throws when the total reference
// length is zero.
ErrorRateReport aggregate(std::span<const ErrorRateReport> reports);

}  // namespace semtok
