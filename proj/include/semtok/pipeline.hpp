#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semtok/durcodec.hpp"
#include "semtok/text2sem.hpp"
#include "semtok/vocab.hpp"

namespace semtok {

// One instruction-tuning record. `tokens` and `user_turn_markup` are filled
// by build_record; unknown fields survive a read/write round trip.
struct DatasetRecord {
  std::string id;
  std::string prompt;
  std::string response;
  std::string lang;
  std::optional<TokenStream> tokens;
  std::string user_turn_markup;
  std::map<std::string, std::string> meta;
  std::map<std::string, std::string> unknown;

  bool operator==(const DatasetRecord&) const = default;
};

enum class RejectReason {
  TooLong,
  TooShort,
  MathContent,
  ExcessivePunctuation,
  OutOfAlphabet,
};

// Stable machine-readable code, e.g. "too_long".
std::string_view reason_code(RejectReason reason);
RejectReason reason_from_code(std::string_view code);

struct Verdict {
  bool accepted = false;
  RejectReason reason = RejectReason::TooLong;

  static Verdict accept() { return {true, RejectReason::TooLong}; }
  static Verdict reject(RejectReason r) { return {false, r}; }
  bool operator==(const Verdict&) const = default;
};

struct FilterConfig {
  std::uint64_t max_prompt_chars = 512;  // raw codepoints
  std::uint64_t min_prompt_chars = 1;    // normalized codepoints
  double max_nonalpha_ratio = 0.30;

  void validate() const;
};

// Record-local, deterministic. Checks in order: too_short, too_long,
// math content (backslash commands, $...$ spans, 3+ of = ^ _ combined),
// excessive punctuation (non-letter/digit/space ratio over raw codepoints).
Verdict filter(const DatasetRecord& record, const FilterConfig& cfg);

struct BuildOutcome {
  Verdict verdict;
  DatasetRecord record;  // meaningful only when verdict.accepted
};

// Translates the normalized prompt and renders the user turn as the task
// token followed by the wrapped stream. Requires an accepting upstream
// verdict; characters missing from the mapper yield an out_of_alphabet
// verdict rather than an error. Never alters id or response.
BuildOutcome build_record(const DatasetRecord& record, const Verdict& upstream,
                          const MapperModel& model, const VocabSpec& spec);

// filter + build_record in one step.
BuildOutcome process_record(const DatasetRecord& record,
                            const FilterConfig& cfg, const MapperModel& model,
                            const VocabSpec& spec);

// Recovers the token stream from a built user turn (task token + wrapped
// markup). Throws ParseError/Error on any deviation.
TokenStream user_turn_stream(const std::string& markup, const VocabSpec& spec);

struct DatasetStats {
  std::uint64_t input_count = 0;
  std::uint64_t accepted = 0;
  std::map<std::string, std::uint64_t> rejected_by_reason;
  // Bucketed emitted-token counts for accepted records, bucket i covering
  // [16*i, 16*(i+1)).
  std::vector<std::uint64_t> token_length_histogram;
  double mean_compression_ratio = 0.0;

  std::uint64_t rejected_total() const;
};

DatasetStats dataset_stats(std::span<const DatasetRecord> records,
                           const FilterConfig& cfg, const MapperModel& model,
                           const VocabSpec& spec);

// -- dataset file format -------------------------------------------------------
// One record per line: TAB-separated key=value fields, values escaped with
// backslashes (\\ \t \n \r). Key order: id, prompt, response, lang,
// user_turn_markup (when set), meta.* sorted, then unknown keys sorted.
std::string record_to_line(const DatasetRecord& record);
DatasetRecord record_from_line(const std::string& line);

void write_dataset(std::span<const DatasetRecord> records,
                   const std::string& path);
// Enforces id uniqueness across the listed files, reading them in order.
std::vector<DatasetRecord> read_dataset(const std::vector<std::string>& paths);

}  // namespace semtok
