#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "semtok/durcodec.hpp"

namespace semtok {

// Renderable sound ids are 4-digit, so an extended vocabulary can hold at
// most this many sound tokens.
inline constexpr std::uint32_t kMaxSoundVocab = 10000;

inline constexpr std::string_view kTaskTokenText = "<|text_to_semantic|>";
inline constexpr std::string_view kSoundStartText = "<|sound_start|>";
inline constexpr std::string_view kSoundEndText = "<|sound_end|>";

// Deterministic layout of the extended vocabulary on top of a base LLM
// vocabulary of size base_size:
//   sound s        -> base_size + s
//   duration d     -> base_size + sound_count + (d - 2),  d in [2, duration_max]
//   task token     -> base_size + sound_count + (duration_max - 1)
//   <|sound_start|> -> task + 1
//   <|sound_end|>   -> task + 2
struct VocabSpec {
  std::uint32_t base_size = 32000;
  std::uint32_t sound_count = 2048;
  std::uint32_t duration_max = kDefaultMaxRun;  // duration_min is fixed at 2

  // Total ids added on top of the base vocabulary.
  std::uint32_t added_count() const {
    return sound_count + (duration_max - 1) + 3;
  }

  // Throws when the layout constraints do not hold.
  void validate() const;
};

enum class TokenKind : std::uint8_t { Sound, Duration, Task, SoundStart, SoundEnd };

struct Token {
  TokenKind kind = TokenKind::Sound;
  std::uint32_t value = 0;  // sound id or duration value; unused for specials

  bool operator==(const Token&) const = default;
};

std::uint32_t token_id(const VocabSpec& spec, const Token& token);
Token id_token(const VocabSpec& spec, std::uint32_t id);

// Markup literal for one token, e.g. "<|sound_0007|>" or "<|duration_03|>".
std::string token_text(const Token& token);

// Renders a canonical stream to markup; wrap adds the delimiter pair.
// Throws when the stream is not valid for the spec.
std::string render(const VocabSpec& spec, const TokenStream& stream, bool wrap);

struct ParsedStream {
  TokenStream stream;
  bool wrapped = false;
};

// Strict parse of the markup grammar; every rejection is a ParseError with
// the byte offset of the offending input.
ParsedStream parse(const VocabSpec& spec, std::string_view text);

}  // namespace semtok
