#include "semtok/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include "semtok/error.hpp"
#include "semtok/metrics.hpp"
#include "semtok/unicode.hpp"
#include "semtok/util.hpp"

namespace semtok {
namespace {

bool has_backslash_command(const std::string& s) {
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    if (s[i] != '\\') continue;
    const char c = s[i + 1];
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) return true;
  }
  return false;
}

bool has_dollar_span(const std::string& s) {
  const std::size_t first = s.find('$');
  if (first == std::string::npos) return false;
  return s.find('$', first + 2) != std::string::npos;
}

std::size_t math_symbol_count(const std::string& s) {
  std::size_t n = 0;
  for (char c : s)
    if (c == '=' || c == '^' || c == '_') ++n;
  return n;
}

std::string escape_value(const std::string& v) {
  std::string out;
  out.reserve(v.size());
  for (char c : v) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape_value(std::string_view v) {
  std::string out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] != '\\') {
      out += v[i];
      continue;
    }
    if (i + 1 >= v.size()) throw Error("dangling escape in field value");
    switch (v[++i]) {
      case '\\': out += '\\'; break;
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      default: throw Error(std::string("unknown escape \\") + v[i]);
    }
  }
  return out;
}

void check_key(const std::string& key) {
  if (key.empty()) throw Error("empty field key");
  for (char c : key)
    if (c == '=' || c == '\t' || c == '\n' || c == '\r' || c == '\\')
      throw Error("field key '" + key + "' has a reserved character");
}

bool is_reserved_key(const std::string& key) {
  return key == "id" || key == "prompt" || key == "response" ||
         key == "lang" || key == "user_turn_markup" ||
         key.rfind("meta.", 0) == 0;
}

}  // namespace

std::string_view reason_code(RejectReason reason) {
  switch (reason) {
    case RejectReason::TooLong: return "too_long";
    case RejectReason::TooShort: return "too_short";
    case RejectReason::MathContent: return "math_content";
    case RejectReason::ExcessivePunctuation: return "excessive_punctuation";
    case RejectReason::OutOfAlphabet: return "out_of_alphabet";
  }
  throw Error("unknown reject reason");
}

RejectReason reason_from_code(std::string_view code) {
  if (code == "too_long") return RejectReason::TooLong;
  if (code == "too_short") return RejectReason::TooShort;
  if (code == "math_content") return RejectReason::MathContent;
  if (code == "excessive_punctuation") return RejectReason::ExcessivePunctuation;
  if (code == "out_of_alphabet") return RejectReason::OutOfAlphabet;
  throw Error("unknown reject reason code: " + std::string(code));
}

void FilterConfig::validate() const {
  if (max_prompt_chars < 1) throw Error("max_prompt_chars must be >= 1");
  if (min_prompt_chars < 1) throw Error("min_prompt_chars must be >= 1");
  if (min_prompt_chars > max_prompt_chars)
    throw Error("min_prompt_chars must not exceed max_prompt_chars");
  if (!(max_nonalpha_ratio > 0.0))
    throw Error("max_nonalpha_ratio must be > 0");
}

Verdict filter(const DatasetRecord& record, const FilterConfig& cfg) {
  cfg.validate();

  const std::string norm = normalize(record.prompt);
  if (utf8_decode(norm).size() < cfg.min_prompt_chars)
    return Verdict::reject(RejectReason::TooShort);

  const std::u32string raw = utf8_decode(record.prompt);
  if (raw.size() > cfg.max_prompt_chars)
    return Verdict::reject(RejectReason::TooLong);

  if (has_backslash_command(record.prompt) || has_dollar_span(record.prompt) ||
      math_symbol_count(record.prompt) >= 3)
    return Verdict::reject(RejectReason::MathContent);

  std::size_t nonalpha = 0;
  for (char32_t c : raw)
    if (!is_letter(c) && !is_digit(c) && !is_space(c)) ++nonalpha;
  if (static_cast<double>(nonalpha) / static_cast<double>(raw.size()) >
      cfg.max_nonalpha_ratio)
    return Verdict::reject(RejectReason::ExcessivePunctuation);

  return Verdict::accept();
}

BuildOutcome build_record(const DatasetRecord& record, const Verdict& upstream,
                          const MapperModel& model, const VocabSpec& spec) {
  if (!upstream.accepted)
    throw Error("build_record requires an accepted record, got " +
                std::string(reason_code(upstream.reason)));
  spec.validate();

  const std::string norm = normalize(record.prompt);
  for (char32_t c : utf8_decode(norm)) {
    if (!model.table.contains(c))
      return {Verdict::reject(RejectReason::OutOfAlphabet), {}};
  }

  const DurCodecConfig codec{spec.sound_count, spec.duration_max};
  BuildOutcome out;
  out.verdict = Verdict::accept();
  out.record = record;
  out.record.tokens = translate(model, norm, codec);
  out.record.user_turn_markup =
      std::string(kTaskTokenText) + render(spec, *out.record.tokens, true);
  return out;
}

BuildOutcome process_record(const DatasetRecord& record,
                            const FilterConfig& cfg, const MapperModel& model,
                            const VocabSpec& spec) {
  const Verdict v = filter(record, cfg);
  if (!v.accepted) return {v, {}};
  return build_record(record, v, model, spec);
}

TokenStream user_turn_stream(const std::string& markup,
                             const VocabSpec& spec) {
  const std::string_view task = kTaskTokenText;
  if (markup.rfind(task, 0) != 0)
    throw Error("user turn must start with " + std::string(task));
  const ParsedStream parsed = parse(spec, markup.substr(task.size()));
  if (!parsed.wrapped)
    throw Error("user turn stream must be wrapped in start/end markers");
  return parsed.stream;
}

std::uint64_t DatasetStats::rejected_total() const {
  std::uint64_t n = 0;
  for (const auto& [code, count] : rejected_by_reason) n += count;
  return n;
}

DatasetStats dataset_stats(std::span<const DatasetRecord> records,
                           const FilterConfig& cfg, const MapperModel& model,
                           const VocabSpec& spec) {
  DatasetStats stats;
  stats.input_count = records.size();
  double ratio_sum = 0.0;
  for (const DatasetRecord& rec : records) {
    const BuildOutcome out = process_record(rec, cfg, model, spec);
    if (!out.verdict.accepted) {
      ++stats.rejected_by_reason[std::string(reason_code(out.verdict.reason))];
      continue;
    }
    ++stats.accepted;
    const TokenStream& ts = *out.record.tokens;
    const std::uint64_t emitted = emitted_token_count(ts);
    const std::size_t bucket = emitted / 16;
    if (stats.token_length_histogram.size() <= bucket)
      stats.token_length_histogram.resize(bucket + 1, 0);
    ++stats.token_length_histogram[bucket];
    std::uint64_t flat = 0;
    for (const Group& g : ts.groups) flat += g.run;
    ratio_sum += compression_ratio(ts, flat);
  }
  if (stats.accepted > 0)
    stats.mean_compression_ratio =
        ratio_sum / static_cast<double>(stats.accepted);
  return stats;
}

std::string record_to_line(const DatasetRecord& record) {
  if (record.id.empty()) throw Error("record id must not be empty");

  std::vector<std::pair<std::string, std::string>> fields;
  fields.emplace_back("id", record.id);
  fields.emplace_back("prompt", record.prompt);
  fields.emplace_back("response", record.response);
  fields.emplace_back("lang", record.lang);
  if (!record.user_turn_markup.empty())
    fields.emplace_back("user_turn_markup", record.user_turn_markup);
  for (const auto& [k, v] : record.meta) {
    check_key(k);
    fields.emplace_back("meta." + k, v);
  }
  for (const auto& [k, v] : record.unknown) {
    check_key(k);
    if (is_reserved_key(k))
      throw Error("unknown field '" + k + "' collides with a reserved key");
    fields.emplace_back(k, v);
  }

  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) line += '\t';
    line += fields[i].first;
    line += '=';
    line += escape_value(fields[i].second);
  }
  return line;
}

DatasetRecord record_from_line(const std::string& line) {
  DatasetRecord rec;
  std::unordered_set<std::string> seen;
  std::size_t pos = 0;
  bool have_id = false;
  while (pos <= line.size()) {
    std::size_t tab = line.find('\t', pos);
    if (tab == std::string::npos) tab = line.size();
    const std::string field = line.substr(pos, tab - pos);
    pos = tab + 1;
    if (field.empty()) {
      if (pos > line.size()) break;
      throw Error("empty field in record line");
    }
    const std::size_t eq = field.find('=');
    if (eq == std::string::npos)
      throw Error("field without '=': " + field);
    const std::string key = field.substr(0, eq);
    const std::string value = unescape_value(
        std::string_view(field).substr(eq + 1));
    if (!seen.insert(key).second)
      throw Error("duplicate field key '" + key + "'");

    if (key == "id") {
      rec.id = value;
      have_id = true;
    } else if (key == "prompt") {
      rec.prompt = value;
    } else if (key == "response") {
      rec.response = value;
    } else if (key == "lang") {
      rec.lang = value;
    } else if (key == "user_turn_markup") {
      rec.user_turn_markup = value;
    } else if (key.rfind("meta.", 0) == 0) {
      rec.meta[key.substr(5)] = value;
    } else {
      rec.unknown[key] = value;
    }
  }
  if (!have_id || rec.id.empty())
    throw Error("record line is missing an id field");
  return rec;
}

void write_dataset(std::span<const DatasetRecord> records,
                   const std::string& path) {
  std::unordered_set<std::string> ids;
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  for (const DatasetRecord& rec : records) {
    if (!ids.insert(rec.id).second)
      throw Error("duplicate id '" + rec.id + "' in dataset");
    out << record_to_line(rec) << '\n';
  }
  if (!out) throw Error("short write to " + path);
}

std::vector<DatasetRecord> read_dataset(const std::vector<std::string>& paths) {
  std::vector<DatasetRecord> records;
  std::unordered_set<std::string> ids;
  for (const std::string& path : paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      try {
        records.push_back(record_from_line(line));
      } catch (const Error& e) {
        throw Error(path + ":" + std::to_string(lineno) + ": " + e.what());
      }
      if (!ids.insert(records.back().id).second)
        throw Error(path + ":" + std::to_string(lineno) + ": duplicate id '" +
                    records.back().id + "'");
    }
  }
  return records;
}

}  // namespace semtok
