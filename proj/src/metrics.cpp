#include "semtok/metrics.hpp"

#include <vector>

#include "semtok/error.hpp"
#include "semtok/unicode.hpp"
#include "semtok/util.hpp"

namespace semtok {

std::string normalize(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    char32_t cp = utf8_decode_next(text, pos);
    if (is_space(cp)) {
      if (!out.empty()) pending_space = true;
      continue;
    }
    cp = to_lower(cp);
    if (!is_letter(cp) && !is_digit(cp)) continue;
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    utf8_append(out, cp);
  }
  return out;
}

namespace {

struct Cell {
  std::uint64_t dist = 0;
  std::uint64_t sub = 0;
  std::uint64_t ins = 0;
  std::uint64_t del = 0;
};

// Two-row Levenshtein DP carrying operation counts. Ties are broken toward
// the diagonal, then deletion, then insertion, so counts are deterministic.
template <typename T>
ErrorRateReport edit_report(const std::vector<T>& ref,
                            const std::vector<T>& hyp) {
  const std::size_t n = ref.size();
  const std::size_t m = hyp.size();
  std::vector<Cell> prev(m + 1), cur(m + 1);
  for (std::size_t j = 1; j <= m; ++j) {
    prev[j].dist = j;
    prev[j].ins = j;
  }
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0].dist = i;
    cur[0].sub = 0;
    cur[0].ins = 0;
    cur[0].del = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const bool eq = ref[i - 1] == hyp[j - 1];
      Cell best = prev[j - 1];
      best.dist += eq ? 0 : 1;
      best.sub += eq ? 0 : 1;
      Cell del = prev[j];
      del.dist += 1;
      del.del += 1;
      if (del.dist < best.dist) best = del;
      Cell ins = cur[j - 1];
      ins.dist += 1;
      ins.ins += 1;
      if (ins.dist < best.dist) best = ins;
      cur[j] = best;
    }
    std::swap(prev, cur);
  }
  ErrorRateReport report;
  report.substitutions = prev[m].sub;
  report.insertions = prev[m].ins;
  report.deletions = prev[m].del;
  report.reference_length = n;
  report.rate = static_cast<double>(prev[m].dist) / static_cast<double>(n);
  return report;
}

std::vector<std::string> split_words(const std::string& normalized) {
  std::vector<std::string> words;
  std::size_t start = 0;
  while (start < normalized.size()) {
    std::size_t end = normalized.find(' ', start);
    if (end == std::string::npos) end = normalized.size();
    if (end > start) words.push_back(normalized.substr(start, end - start));
    start = end + 1;
  }
  return words;
}

std::vector<std::uint32_t> expand_ids(const TokenStream& stream) {
  std::vector<std::uint32_t> ids;
  for (const Group& g : stream.groups) ids.insert(ids.end(), g.run, g.sound);
  return ids;
}

}  // namespace

ErrorRateReport wer(std::string_view ref, std::string_view hyp) {
  const auto ref_words = split_words(normalize(ref));
  const auto hyp_words = split_words(normalize(hyp));
  if (ref_words.empty()) throw Error("undefined rate: empty reference");
  return edit_report(ref_words, hyp_words);
}

ErrorRateReport cer(std::string_view ref, std::string_view hyp) {
  const std::u32string ref_n = utf8_decode(normalize(ref));
  const std::u32string hyp_n = utf8_decode(normalize(hyp));
  if (ref_n.empty()) throw Error("undefined rate: empty reference");
  return edit_report(std::vector<char32_t>(ref_n.begin(), ref_n.end()),
                     std::vector<char32_t>(hyp_n.begin(), hyp_n.end()));
}

ErrorRateReport ter(const TokenStream& ref, const TokenStream& hyp) {
  const auto ref_ids = expand_ids(ref);
  const auto hyp_ids = expand_ids(hyp);
  if (ref_ids.empty()) throw Error("undefined rate: empty reference");
  return edit_report(ref_ids, hyp_ids);
}

ErrorRateReport aggregate(std::span<const ErrorRateReport> reports) {
  ErrorRateReport total;
  for (const ErrorRateReport& r : reports) {
    total.substitutions += r.substitutions;
    total.insertions += r.insertions;
    total.deletions += r.deletions;
    total.reference_length += r.reference_length;
  }
  if (total.reference_length == 0) {
    throw Error("undefined rate: empty reference");
  }
  total.rate = static_cast<double>(total.distance()) /
               static_cast<double>(total.reference_length);
  return total;
}

}  // namespace semtok
