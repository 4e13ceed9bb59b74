#include "semtok/unicode.hpp"

#include <algorithm>
#include <cstddef>
#include <iterator>

namespace semtok {

namespace {
#include "unicode_tables.inc"

bool in_ranges(const char32_t (*ranges)[2], std::size_t n, char32_t cp) {
  std::size_t lo = 0, hi = n;
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (cp < ranges[mid][0]) {
      hi = mid;
    } else if (cp > ranges[mid][1]) {
      lo = mid + 1;
    } else {
      return true;
    }
  }
  return false;
}
}  // namespace

bool is_letter(char32_t cp) {
  return in_ranges(kLetterRanges, std::size(kLetterRanges), cp);
}

bool is_digit(char32_t cp) {
  return in_ranges(kDigitRanges, std::size(kDigitRanges), cp);
}

bool is_space(char32_t cp) {
  return std::binary_search(std::begin(kSpaceList), std::end(kSpaceList), cp);
}

char32_t to_lower(char32_t cp) {
  const char32_t* begin = std::begin(kLowerKeys);
  const char32_t* end = std::end(kLowerKeys);
  const char32_t* it = std::lower_bound(begin, end, cp);
  if (it != end && *it == cp) return kLowerVals[it - begin];
  return cp;
}

}  // namespace semtok
