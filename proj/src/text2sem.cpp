#include "semtok/text2sem.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "semtok/error.hpp"
#include "semtok/util.hpp"

namespace semtok {
namespace {

std::string cp_label(char32_t c) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "U+%04X", static_cast<unsigned>(c));
  return buf;
}

std::u32string sorted_alphabet(const std::string& alphabet) {
  std::u32string cps = utf8_decode(alphabet);
  if (cps.empty()) throw Error("alphabet must not be empty");
  std::sort(cps.begin(), cps.end());
  if (std::adjacent_find(cps.begin(), cps.end()) != cps.end())
    throw Error("alphabet has repeated characters");
  return cps;
}

constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

// Monotonic alignment of m groups onto n chars (1 <= n <= m): each char takes
// a non-empty contiguous span, spans partition the groups in order. Minimizes
// total per-group cost; equal-cost splits resolve to the earliest boundary.
struct Alignment {
  std::vector<std::uint32_t> char_of_group;
  std::uint64_t cost = 0;
};

Alignment align_pair(const std::u32string& chars,
                     const std::vector<Group>& groups,
                     const std::map<char32_t, Emission>& table) {
  const std::size_t n = chars.size();
  const std::size_t m = groups.size();

  // cost[j][g]: 1 unless the group's sound matches the char's current sound.
  std::vector<std::int64_t> prefix((m + 1));
  std::vector<std::int64_t> prev(m + 1, kInf), cur(m + 1, kInf);
  std::vector<std::uint32_t> choice((n + 1) * (m + 1), 0);
  prev[0] = 0;

  for (std::size_t j = 1; j <= n; ++j) {
    std::uint32_t best_sound = 0;
    bool have_sound = false;
    if (auto it = table.find(chars[j - 1]); it != table.end()) {
      best_sound = it->second.sound;
      have_sound = true;
    }
    prefix[0] = 0;
    for (std::size_t g = 0; g < m; ++g) {
      const bool match = have_sound && groups[g].sound == best_sound;
      prefix[g + 1] = prefix[g] + (match ? 0 : 1);
    }

    std::fill(cur.begin(), cur.end(), kInf);
    std::int64_t best_val = kInf;
    std::size_t best_s = 0;
    for (std::size_t i = j; i <= m; ++i) {
      const std::size_t s = i - 1;  // newly eligible split point
      if (s >= j - 1 && prev[s] < kInf) {
        const std::int64_t cand = prev[s] - prefix[s];
        if (cand < best_val) {
          best_val = cand;
          best_s = s;
        }
      }
      if (best_val < kInf) {
        cur[i] = best_val + prefix[i];
        choice[j * (m + 1) + i] = static_cast<std::uint32_t>(best_s);
      }
    }
    std::swap(prev, cur);
  }

  Alignment out;
  out.cost = static_cast<std::uint64_t>(prev[m]);
  out.char_of_group.resize(m);
  std::size_t end = m;
  for (std::size_t j = n; j >= 1; --j) {
    const std::size_t start = choice[j * (m + 1) + end];
    for (std::size_t g = start; g < end; ++g)
      out.char_of_group[g] = static_cast<std::uint32_t>(j - 1);
    end = start;
  }
  return out;
}

}  // namespace

void OracleConfig::validate() const {
  if (dim == 0) throw Error("oracle dim must be >= 1");
  if (min_duration < 1 || min_duration > max_duration)
    throw Error("oracle duration range must satisfy 1 <= min <= max");
  if (!(noise_std >= 0.0)) throw Error("noise_std must be >= 0");
  sorted_alphabet(alphabet);
}

std::vector<float> OracleConfig::base_vector(char32_t c) const {
  NormalSampler sampler(mix_seed(mix_seed(seed, c), 1));
  std::vector<double> v(dim);
  double norm2 = 0.0;
  for (auto& x : v) {
    x = sampler.next();
    norm2 += x * x;
  }
  std::vector<float> out(dim);
  if (norm2 < 1e-24) {
    out[0] = 1.0f;
    return out;
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (std::size_t i = 0; i < dim; ++i)
    out[i] = static_cast<float>(v[i] * inv);
  return out;
}

std::uint32_t OracleConfig::duration(char32_t c) const {
  const std::uint32_t range = max_duration - min_duration + 1;
  return min_duration +
         static_cast<std::uint32_t>(splitmix64(mix_seed(seed, c) ^ 0x9E3779B9) %
                                    range);
}

FeatureSeq speak(const std::string& text, const OracleConfig& cfg) {
  cfg.validate();
  const std::u32string alpha = sorted_alphabet(cfg.alphabet);
  const std::unordered_set<char32_t> allowed(alpha.begin(), alpha.end());

  const std::u32string cps = utf8_decode(text);
  std::size_t total = 0;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (!allowed.contains(cps[i]))
      throw Error("character " + cp_label(cps[i]) +
                  " not in oracle alphabet at position " + std::to_string(i));
    total += cfg.duration(cps[i]);
  }

  FeatureSeq out;
  out.dim = cfg.dim;
  out.data.reserve(total * cfg.dim);
  for (char32_t c : cps) {
    const std::vector<float> base = cfg.base_vector(c);
    const std::uint32_t dur = cfg.duration(c);
    for (std::uint32_t r = 0; r < dur; ++r)
      out.data.insert(out.data.end(), base.begin(), base.end());
  }

  if (cfg.noise_std > 0.0) {
    const std::uint64_t text_hash = fnv1a64(text);
    NormalSampler noise(mix_seed(mix_seed(cfg.seed, text_hash), 3));
    for (auto& v : out.data)
      v = static_cast<float>(v + noise.next() * cfg.noise_std);
  }
  return out;
}

TokenStream speech_path(const std::string& text, const OracleConfig& cfg,
                        const Quantizer& q, std::uint32_t max_run) {
  const FeatureSeq frames = speak(text, cfg);
  if (frames.frame_count() == 0) return {};
  const SemanticTokenSeq tokens = encode(q, frames);
  const DurCodecConfig codec{
      static_cast<std::uint32_t>(q.codebook(0).size()), max_run};
  return compress(tokens.level(0), codec);
}

std::uint64_t MapperModel::digest() const {
  std::uint64_t h = fnv1a64("mapperv1");
  for (char32_t c : alphabet) {
    const std::uint32_t cp = c;
    h = fnv1a64(std::string_view(reinterpret_cast<const char*>(&cp), 4), h);
  }
  for (const auto& [c, e] : table) {
    const std::uint32_t row[3] = {c, e.sound, e.duration};
    h = fnv1a64(std::string_view(reinterpret_cast<const char*>(row), 12), h);
  }
  return h;
}

MapperModel train_mapper(std::span<const TrainPair> pairs,
                         const std::string& alphabet, unsigned threads) {
  MapperModel model;
  model.alphabet = sorted_alphabet(alphabet);
  const std::unordered_set<char32_t> allowed(model.alphabet.begin(),
                                             model.alphabet.end());

  struct Usable {
    std::u32string chars;
    const std::vector<Group>* groups;
  };
  std::vector<Usable> usable;
  usable.reserve(pairs.size());
  std::unordered_set<char32_t> observed;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    std::u32string cps = utf8_decode(pairs[p].text);
    for (char32_t c : cps) {
      if (!allowed.contains(c))
        throw Error("pair " + std::to_string(p) + " has character " +
                    cp_label(c) + " outside the alphabet");
    }
    if (cps.empty() && pairs[p].stream.empty()) continue;
    if (pairs[p].stream.groups.size() < cps.size() || cps.empty()) {
      ++model.diagnostics.skipped_pairs;
      continue;
    }
    observed.insert(cps.begin(), cps.end());
    usable.push_back(Usable{std::move(cps), &pairs[p].stream.groups});
  }

  std::string missing;
  for (char32_t c : model.alphabet) {
    if (!observed.contains(c)) {
      if (!missing.empty()) missing += ", ";
      missing += cp_label(c);
    }
  }
  if (!missing.empty())
    throw Error("no usable training pair covers: " + missing);

  std::vector<Alignment> aligned(usable.size());
  for (std::uint32_t iter = 1; iter <= kMaxMapperIters; ++iter) {
    parallel_for(usable.size(), threads, [&](std::size_t begin,
                                             std::size_t end) {
      for (std::size_t p = begin; p < end; ++p)
        aligned[p] = align_pair(usable[p].chars, *usable[p].groups,
                                model.table);
    });

    std::uint64_t total_cost = 0;
    std::map<char32_t, std::map<std::uint32_t, std::uint64_t>> votes;
    std::map<char32_t, std::vector<std::uint32_t>> runs;
    for (std::size_t p = 0; p < usable.size(); ++p) {
      total_cost += aligned[p].cost;
      const auto& groups = *usable[p].groups;
      for (std::size_t g = 0; g < groups.size(); ++g) {
        const char32_t c = usable[p].chars[aligned[p].char_of_group[g]];
        ++votes[c][groups[g].sound];
        runs[c].push_back(groups[g].run);
      }
    }
    model.diagnostics.cost_per_iter.push_back(total_cost);

    std::map<char32_t, Emission> next;
    for (auto& [c, counts] : votes) {
      std::uint32_t best_sound = 0;
      std::uint64_t best_count = 0;
      for (const auto& [sound, count] : counts) {
        if (count > best_count) {
          best_count = count;
          best_sound = sound;
        }
      }
      auto& r = runs[c];
      std::sort(r.begin(), r.end());
      next[c] = Emission{best_sound, r[(r.size() - 1) / 2]};
    }

    model.diagnostics.iterations = iter;
    if (next == model.table) {
      model.diagnostics.converged = true;
      break;
    }
    model.table = std::move(next);
  }
  return model;
}

TokenStream translate(const MapperModel& model, const std::string& text,
                      const DurCodecConfig& codec) {
  const std::u32string cps = utf8_decode(text);
  std::vector<std::uint32_t> flat;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const auto it = model.table.find(cps[i]);
    if (it == model.table.end())
      throw Error("character " + cp_label(cps[i]) +
                  " not in mapper table at position " + std::to_string(i));
    flat.insert(flat.end(), it->second.duration, it->second.sound);
  }
  return compress(flat, codec);
}

void save_mapper(const MapperModel& model, const std::string& path) {
  if (model.alphabet.size() != model.table.size())
    throw Error("mapper table does not cover its alphabet");
  for (char32_t c : model.alphabet)
    if (!model.table.contains(c))
      throw Error("mapper table is missing " + cp_label(c));

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  char line[64];
  std::snprintf(line, sizeof(line), "mapperv1 %zu %s\n", model.table.size(),
                hex64(model.digest()).c_str());
  out << line;
  for (const auto& [c, e] : model.table) {
    std::snprintf(line, sizeof(line), "%04x %u %u\n",
                  static_cast<unsigned>(c), e.sound, e.duration);
    out << line;
  }
  if (!out) throw Error("short write to " + path);
}

MapperModel load_mapper(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::string header;
  if (!std::getline(in, header)) throw Error("empty mapper file " + path);
  std::size_t count = 0;
  char digest_hex[32];
  if (std::sscanf(header.c_str(), "mapperv1 %zu %16s", &count, digest_hex) !=
      2)
    throw Error("bad mapper header in " + path + ": " + header);

  MapperModel model;
  model.diagnostics.converged = true;
  std::string line;
  char32_t prev = 0;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    unsigned cp = 0, sound = 0, dur = 0;
    if (std::sscanf(line.c_str(), "%x %u %u", &cp, &sound, &dur) != 3)
      throw Error("bad mapper line in " + path + ": " + line);
    if (dur < 1) throw Error("mapper duration must be >= 1 in " + path);
    const char32_t c = static_cast<char32_t>(cp);
    if (!first && c <= prev)
      throw Error("mapper lines out of order in " + path + " at " + line);
    first = false;
    prev = c;
    model.alphabet.push_back(c);
    model.table[c] = Emission{sound, dur};
  }
  if (model.table.size() != count)
    throw Error("mapper file " + path + " header claims " +
                std::to_string(count) + " entries, found " +
                std::to_string(model.table.size()));
  if (hex64(model.digest()) != digest_hex)
    throw Error("mapper digest mismatch in " + path);
  return model;
}

}  // namespace semtok
