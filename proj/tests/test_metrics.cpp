#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "semtok/error.hpp"
#include "semtok/metrics.hpp"
#include "semtok/util.hpp"

using namespace semtok;

namespace {

// Full-matrix edit DP written independently of the two-row production code,
// with the same tie policy (diagonal, then deletion, then insertion).
struct OracleCounts {
  std::uint64_t dist = 0, sub = 0, ins = 0, del = 0;
};

template <typename T>
OracleCounts oracle_edit(const std::vector<T>& ref, const std::vector<T>& hyp) {
  const std::size_t n = ref.size(), m = hyp.size();
  std::vector<std::vector<OracleCounts>> t(n + 1,
                                           std::vector<OracleCounts>(m + 1));
  for (std::size_t j = 1; j <= m; ++j) t[0][j] = {j, 0, j, 0};
  for (std::size_t i = 1; i <= n; ++i) t[i][0] = {i, 0, 0, i};
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::uint64_t c = ref[i - 1] == hyp[j - 1] ? 0 : 1;
      OracleCounts best = t[i - 1][j - 1];
      best.dist += c;
      best.sub += c;
      if (t[i - 1][j].dist + 1 < best.dist) {
        best = t[i - 1][j];
        best.dist += 1;
        best.del += 1;
      }
      if (t[i][j - 1].dist + 1 < best.dist) {
        best = t[i][j - 1];
        best.dist += 1;
        best.ins += 1;
      }
      t[i][j] = best;
    }
  }
  return t[n][m];
}

std::vector<std::uint32_t> random_ids(std::mt19937_64& rng, std::size_t max_len,
                                      std::uint32_t alphabet) {
  std::vector<std::uint32_t> v(uniform_below(rng, max_len + 1));
  for (auto& x : v) x = static_cast<std::uint32_t>(uniform_below(rng, alphabet));
  return v;
}

TokenStream stream_of(const std::vector<std::uint32_t>& ids) {
  TokenStream s;
  for (std::uint32_t id : ids) {
    if (!s.groups.empty() && s.groups.back().sound == id &&
        s.groups.back().run < kDefaultMaxRun) {
      ++s.groups.back().run;
    } else {
      s.groups.push_back({id, 1});
    }
  }
  return s;
}

std::string random_unicode(std::mt19937_64& rng) {
  static const std::vector<std::pair<char32_t, char32_t>> ranges = {
      {0x20, 0x7e},     {0xa0, 0xff},     {0x100, 0x17f},
      {0x1ea0, 0x1ef9}, {0x4e00, 0x4e80}, {0x1f600, 0x1f640},
      {0x9, 0xd},       {0x2000, 0x200a},
  };
  std::string out;
  const std::size_t n = uniform_below(rng, 40);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = ranges[uniform_below(rng, ranges.size())];
    const auto cp = static_cast<char32_t>(
        r.first + uniform_below(rng, r.second - r.first + 1));
    utf8_append(out, cp);
  }
  return out;
}

}  // namespace

TEST_CASE("normalize strips punctuation and lowercases") {
  CHECK(normalize("Hello, World!") == "hello world");
  CHECK(normalize("Xin ch\xc3\xa0o!!") == "xin ch\xc3\xa0o");
  CHECK(normalize("  a\t\tb\nc  ") == "a b c");
  CHECK(normalize("") == "");
  CHECK(normalize("!!!") == "");
  CHECK(normalize("ABC123") == "abc123");
}

TEST_CASE("normalize is idempotent on random strings") {
  std::mt19937_64 rng(7);
  for (int it = 0; it < 3000; ++it) {
    const std::string s = random_unicode(rng);
    const std::string once = normalize(s);
    CHECK(normalize(once) == once);
  }
}

TEST_CASE("wer hand-computed examples") {
  const ErrorRateReport zero = wer("a b c", "a b c");
  CHECK(zero.rate == 0.0);
  CHECK(zero.distance() == 0);
  CHECK(zero.reference_length == 3);

  const ErrorRateReport sub = wer("a b c", "a x c");
  CHECK(sub.rate == doctest::Approx(1.0 / 3.0));
  CHECK(sub.substitutions == 1);
  CHECK(sub.insertions == 0);
  CHECK(sub.deletions == 0);

  const ErrorRateReport del = wer("a b", "");
  CHECK(del.rate == doctest::Approx(1.0));
  CHECK(del.deletions == 2);
  CHECK(del.reference_length == 2);

  CHECK_THROWS_WITH_AS(wer("", "a"), doctest::Contains("undefined rate"),
                       Error);
  CHECK_THROWS_AS(wer("!!!", "a"), Error);
}

TEST_CASE("wer normalizes defensively") {
  CHECK(wer("Hello, World!", "hello world").rate == 0.0);
}

TEST_CASE("cer hand-computed examples") {
  CHECK(cer("abc", "abc").rate == 0.0);

  const ErrorRateReport sub = cer("abc", "adc");
  CHECK(sub.rate == doctest::Approx(1.0 / 3.0));
  CHECK(sub.substitutions == 1);

  const ErrorRateReport sp = cer("ab cd", "abcd");
  CHECK(sp.rate == doctest::Approx(1.0 / 5.0));
  CHECK(sp.deletions == 1);
  CHECK(sp.substitutions == 0);
  CHECK(sp.reference_length == 5);

  CHECK_THROWS_AS(cer("", "x"), Error);
}

TEST_CASE("ter hand-computed examples") {
  TokenStream a, b;
  a.groups = {{7, 3}};
  b.groups = {{7, 2}};
  CHECK(ter(a, a).rate == 0.0);

  const ErrorRateReport r = ter(a, b);
  CHECK(r.rate == doctest::Approx(1.0 / 3.0));
  CHECK(r.deletions == 1);
  CHECK(r.reference_length == 3);

  TokenStream empty;
  CHECK_THROWS_AS(ter(empty, a), Error);
  CHECK_NOTHROW(ter(a, empty));
  CHECK(ter(a, empty).rate == doctest::Approx(1.0));
}

TEST_CASE("ter matches the independent DP oracle") {
  std::mt19937_64 rng(11);
  for (int it = 0; it < 1000; ++it) {
    auto ref = random_ids(rng, 20, 5);
    auto hyp = random_ids(rng, 20, 5);
    if (ref.empty()) ref.push_back(1);
    const OracleCounts want = oracle_edit(ref, hyp);
    const ErrorRateReport got = ter(stream_of(ref), stream_of(hyp));
    CHECK(got.distance() == want.dist);
    CHECK(got.substitutions == want.sub);
    CHECK(got.insertions == want.ins);
    CHECK(got.deletions == want.del);
    CHECK(got.reference_length == ref.size());
    // Each alignment consumes both sequences fully.
    CHECK(got.reference_length + got.insertions - got.deletions == hyp.size());
  }
}

TEST_CASE("distance is symmetric and satisfies the triangle inequality") {
  std::mt19937_64 rng(13);
  for (int it = 0; it < 400; ++it) {
    auto a = random_ids(rng, 12, 4);
    auto b = random_ids(rng, 12, 4);
    auto c = random_ids(rng, 12, 4);
    if (a.empty()) a.push_back(0);
    if (b.empty()) b.push_back(0);
    if (c.empty()) c.push_back(0);
    const auto sa = stream_of(a), sb = stream_of(b), sc = stream_of(c);
    const auto ab = ter(sa, sb).distance();
    const auto ba = ter(sb, sa).distance();
    CHECK(ab == ba);
    CHECK(ab <= ter(sa, sc).distance() + ter(sc, sb).distance());
    if (a == b) CHECK(ab == 0);
    if (ab == 0) CHECK(a == b);
  }
}

TEST_CASE("aggregate pools counts") {
  std::vector<ErrorRateReport> reports;
  reports.push_back(wer("a b c", "a x c"));
  reports.push_back(wer("a b", ""));
  const ErrorRateReport total = aggregate(reports);
  CHECK(total.substitutions == 1);
  CHECK(total.deletions == 2);
  CHECK(total.insertions == 0);
  CHECK(total.reference_length == 5);
  CHECK(total.rate == doctest::Approx(3.0 / 5.0));

  CHECK_THROWS_AS(aggregate({}), Error);
  std::vector<ErrorRateReport> zero_len(2);
  CHECK_THROWS_AS(aggregate(zero_len), Error);
}
