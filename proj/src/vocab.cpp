#include "semtok/vocab.hpp"

#include <cstdio>

#include "semtok/error.hpp"

namespace semtok {

void VocabSpec::validate() const {
  if (sound_count < 1 || sound_count > kMaxSoundVocab) {
    throw Error("sound_count " + std::to_string(sound_count) +
                " outside [1, " + std::to_string(kMaxSoundVocab) + "]");
  }
  if (duration_max < 2 || duration_max > 99) {
    throw Error("duration_max " + std::to_string(duration_max) +
                " outside [2, 99]");
  }
}

std::uint32_t token_id(const VocabSpec& spec, const Token& token) {
  switch (token.kind) {
    case TokenKind::Sound:
      if (token.value >= spec.sound_count) {
        throw Error("sound id " + std::to_string(token.value) +
                    " outside vocabulary");
      }
      return spec.base_size + token.value;
    case TokenKind::Duration:
      if (token.value < 2 || token.value > spec.duration_max) {
        throw Error("duration " + std::to_string(token.value) +
                    " outside [2, " + std::to_string(spec.duration_max) + "]");
      }
      return spec.base_size + spec.sound_count + (token.value - 2);
    case TokenKind::Task:
      return spec.base_size + spec.sound_count + (spec.duration_max - 1);
    case TokenKind::SoundStart:
      return spec.base_size + spec.sound_count + (spec.duration_max - 1) + 1;
    case TokenKind::SoundEnd:
      return spec.base_size + spec.sound_count + (spec.duration_max - 1) + 2;
  }
  throw Error("unknown token kind");
}

Token id_token(const VocabSpec& spec, std::uint32_t id) {
  if (id < spec.base_size || id >= spec.base_size + spec.added_count()) {
    throw Error("id " + std::to_string(id) + " outside extended range [" +
                std::to_string(spec.base_size) + ", " +
                std::to_string(spec.base_size + spec.added_count()) + ")");
  }
  std::uint32_t off = id - spec.base_size;
  if (off < spec.sound_count) return {TokenKind::Sound, off};
  off -= spec.sound_count;
  if (off < spec.duration_max - 1) return {TokenKind::Duration, off + 2};
  off -= spec.duration_max - 1;
  switch (off) {
    case 0: return {TokenKind::Task, 0};
    case 1: return {TokenKind::SoundStart, 0};
    case 2: return {TokenKind::SoundEnd, 0};
  }
  throw Error("id " + std::to_string(id) + " outside extended range");
}

std::string token_text(const Token& token) {
  char buf[32];
  switch (token.kind) {
    case TokenKind::Sound:
      std::snprintf(buf, sizeof(buf), "<|sound_%04u|>", token.value);
      return buf;
    case TokenKind::Duration:
      std::snprintf(buf, sizeof(buf), "<|duration_%02u|>", token.value);
      return buf;
    case TokenKind::Task:
      return std::string(kTaskTokenText);
    case TokenKind::SoundStart:
      return std::string(kSoundStartText);
    case TokenKind::SoundEnd:
      return std::string(kSoundEndText);
  }
  throw Error("unknown token kind");
}

std::string render(const VocabSpec& spec, const TokenStream& stream,
                   bool wrap) {
  spec.validate();
  std::string out;
  if (wrap) out += kSoundStartText;
  const Group* prev = nullptr;
  for (const Group& g : stream.groups) {
    if (g.sound >= spec.sound_count) {
      throw Error("sound id " + std::to_string(g.sound) + " unrenderable");
    }
    if (g.run < 1 || g.run > spec.duration_max) {
      throw Error("run length " + std::to_string(g.run) + " unrenderable");
    }
    if (prev && prev->sound == g.sound && prev->run < spec.duration_max) {
      throw Error("non-canonical stream: repeated sound " +
                  std::to_string(g.sound) + " without forced split");
    }
    out += token_text({TokenKind::Sound, g.sound});
    if (g.run >= 2) out += token_text({TokenKind::Duration, g.run});
    prev = &g;
  }
  if (wrap) out += kSoundEndText;
  return out;
}

namespace {

bool match(std::string_view text, std::size_t pos, std::string_view lit) {
  return text.substr(pos, lit.size()) == lit;
}

// Parses exactly `n` ASCII digits at pos; on failure throws pointing at the
// first bad byte.
std::uint32_t parse_digits(std::string_view text, std::size_t& pos,
                           std::size_t n, const char* what) {
  std::uint32_t value = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (pos >= text.size() || text[pos] < '0' || text[pos] > '9') {
      throw ParseError(std::string("malformed ") + what +
                       " token: expected digit", pos);
    }
    value = value * 10 + static_cast<std::uint32_t>(text[pos] - '0');
    ++pos;
  }
  return value;
}

void expect(std::string_view text, std::size_t& pos, std::string_view lit,
            const char* what) {
  if (!match(text, pos, lit)) {
    throw ParseError(std::string("malformed ") + what + " token: expected '" +
                     std::string(lit) + "'", pos);
  }
  pos += lit.size();
}

}  // namespace

ParsedStream parse(const VocabSpec& spec, std::string_view text) {
  spec.validate();
  ParsedStream out;
  std::size_t pos = 0;

  if (match(text, 0, kSoundStartText)) {
    out.wrapped = true;
    pos = kSoundStartText.size();
  }

  bool closed = false;
  // Index of the group a duration token may still attach to; -1 when the
  // last group already carries one (or there is none).
  std::ptrdiff_t open_group = -1;

  while (pos < text.size()) {
    const std::size_t tok_start = pos;
    if (match(text, pos, kSoundEndText)) {
      if (!out.wrapped) {
        throw ParseError("unexpected <|sound_end|> in unwrapped stream",
                         tok_start);
      }
      pos += kSoundEndText.size();
      if (pos != text.size()) {
        throw ParseError("trailing content after <|sound_end|>", pos);
      }
      closed = true;
      break;
    }
    if (match(text, pos, kSoundStartText)) {
      throw ParseError("unexpected <|sound_start|>", tok_start);
    }
    if (match(text, pos, "<|sound_")) {
      pos += 8;
      std::uint32_t id = parse_digits(text, pos, 4, "sound");
      expect(text, pos, "|>", "sound");
      if (id >= spec.sound_count) {
        throw ParseError("sound id " + std::to_string(id) +
                         " outside vocabulary", tok_start);
      }
      if (!out.stream.groups.empty()) {
        const Group& prev = out.stream.groups.back();
        if (prev.sound == id && prev.run < spec.duration_max) {
          throw ParseError("non-canonical repeated sound " +
                           std::to_string(id), tok_start);
        }
      }
      out.stream.groups.push_back({id, 1});
      open_group = static_cast<std::ptrdiff_t>(out.stream.groups.size()) - 1;
      continue;
    }
    if (match(text, pos, "<|duration_")) {
      pos += 11;
      std::uint32_t d = parse_digits(text, pos, 2, "duration");
      expect(text, pos, "|>", "duration");
      if (open_group < 0) {
        throw ParseError("duration without sound", tok_start);
      }
      if (d < 2 || d > spec.duration_max) {
        throw ParseError("duration " + std::to_string(d) + " outside [2, " +
                         std::to_string(spec.duration_max) + "]", tok_start);
      }
      out.stream.groups[static_cast<std::size_t>(open_group)].run = d;
      open_group = -1;
      continue;
    }
    throw ParseError("stray text or malformed token", tok_start);
  }

  if (out.wrapped && !closed) {
    throw ParseError("missing <|sound_end|>", pos);
  }
  return out;
}

}  // namespace semtok
