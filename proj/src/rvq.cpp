#include "semtok/rvq.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "semtok/error.hpp"
#include "semtok/util.hpp"
#include "semtok/vocab.hpp"

namespace semtok {
namespace {

// Plain sum of squared differences in double. Kept free of algebraic
// shortcuts so independent recomputation matches bit for bit.
double sq_dist(const float* a, const float* b, std::size_t dim) {
  double acc = 0.0;
  for (std::size_t c = 0; c < dim; ++c) {
    const double d = static_cast<double>(a[c]) - static_cast<double>(b[c]);
    acc += d * d;
  }
  return acc;
}

// Lowest index wins ties via strict less-than.
std::pair<std::uint32_t, double> nearest_entry(const std::vector<float>& entries,
                                               std::size_t k, std::size_t dim,
                                               const float* frame) {
  std::uint32_t best = 0;
  double best_dist = sq_dist(frame, entries.data(), dim);
  for (std::size_t j = 1; j < k; ++j) {
    const double d = sq_dist(frame, entries.data() + j * dim, dim);
    if (d < best_dist) {
      best_dist = d;
      best = static_cast<std::uint32_t>(j);
    }
  }
  return {best, best_dist};
}

void assign_all(const std::vector<float>& entries, std::size_t k,
                std::size_t dim, const std::vector<float>& frames,
                std::size_t n, std::vector<std::uint32_t>& assign,
                std::vector<double>& dist2, unsigned threads) {
  parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto [idx, d] = nearest_entry(entries, k, dim, frames.data() + i * dim);
      assign[i] = idx;
      dist2[i] = d;
    }
  });
}

// Lloyd passes over one level's residuals, starting from `entries` as given.
// Entry 0 is never updated. Dead centroids move to the worst-quantized frames
// (distance descending, frame index ascending, no frame reused in a pass).
// With use_tol, stops once relative MSE improvement drops below tol.
void run_lloyd(std::vector<float>& entries, std::size_t k, std::size_t dim,
               const std::vector<float>& frames, std::size_t n,
               std::uint32_t max_iters, double tol, bool use_tol,
               std::vector<double>* mse_out, unsigned threads) {
  std::vector<std::uint32_t> assign(n);
  std::vector<double> dist2(n);
  std::vector<double> sums(k * dim);
  std::vector<std::uint64_t> counts(k);
  std::vector<std::size_t> order;

  double prev_mse = std::numeric_limits<double>::infinity();
  for (std::uint32_t iter = 0; iter < max_iters; ++iter) {
    assign_all(entries, k, dim, frames, n, assign, dist2, threads);

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += dist2[i];
    const double mse = total / static_cast<double>(n);
    if (mse_out != nullptr) mse_out->push_back(mse);

    if (use_tol && iter > 0) {
      if (prev_mse <= 0.0) break;
      if ((prev_mse - mse) / prev_mse < tol) break;
    }
    prev_mse = mse;

    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t a = assign[i];
      ++counts[a];
      double* s = sums.data() + static_cast<std::size_t>(a) * dim;
      const float* f = frames.data() + i * dim;
      for (std::size_t c = 0; c < dim; ++c) s[c] += static_cast<double>(f[c]);
    }

    bool any_dead = false;
    for (std::size_t j = 1; j < k; ++j) {
      if (counts[j] == 0) {
        any_dead = true;
        continue;
      }
      const double inv = 1.0 / static_cast<double>(counts[j]);
      float* e = entries.data() + j * dim;
      const double* s = sums.data() + j * dim;
      for (std::size_t c = 0; c < dim; ++c)
        e[c] = static_cast<float>(s[c] * inv);
    }

    if (any_dead) {
      order.resize(n);
      for (std::size_t i = 0; i < n; ++i) order[i] = i;
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (dist2[a] != dist2[b]) return dist2[a] > dist2[b];
        return a < b;
      });
      std::size_t next = 0;
      for (std::size_t j = 1; j < k; ++j) {
        if (counts[j] != 0) continue;
        const float* f = frames.data() + order[next] * dim;
        std::memcpy(entries.data() + j * dim, f, dim * sizeof(float));
        ++next;
      }
    }
  }
}

// K-1 distinct frames seed the learnable entries; entry 0 stays zero.
std::vector<float> init_entries(const std::vector<float>& frames, std::size_t n,
                                std::size_t dim, std::size_t k,
                                std::mt19937_64& rng) {
  std::vector<float> entries(k * dim, 0.0f);
  std::unordered_set<std::uint64_t> used;
  std::size_t filled = 1;
  while (filled < k) {
    const std::uint64_t pick = uniform_below(rng, n);
    if (!used.insert(pick).second) continue;
    std::memcpy(entries.data() + filled * dim, frames.data() + pick * dim,
                dim * sizeof(float));
    ++filled;
  }
  return entries;
}

// Subtracts each frame's nearest entry in place and returns the indices.
std::vector<std::uint32_t> consume_level(const std::vector<float>& entries,
                                         std::size_t k, std::size_t dim,
                                         std::vector<float>& residuals,
                                         std::size_t n, unsigned threads) {
  std::vector<std::uint32_t> idx(n);
  parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      float* r = residuals.data() + i * dim;
      auto [j, d] = nearest_entry(entries, k, dim, r);
      (void)d;
      idx[i] = j;
      const float* e = entries.data() + static_cast<std::size_t>(j) * dim;
      for (std::size_t c = 0; c < dim; ++c) r[c] -= e[c];
    }
  });
  return idx;
}

void require_same_dim(const Quantizer& q, const FeatureSeq& data) {
  if (data.dim != q.dim())
    throw Error("feature dim " + std::to_string(data.dim) +
                " does not match quantizer dim " + std::to_string(q.dim()));
}

}  // namespace

void FeatureSeq::validate() const {
  if (dim == 0) throw Error("feature dim must be >= 1");
  if (data.size() % dim != 0)
    throw Error("feature data is not a whole number of frames");
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data[i]))
      throw Error("invalid input: non-finite feature value at flat index " +
                  std::to_string(i));
  }
}

void TrainConfig::validate() const {
  if (levels < 1) throw Error("levels must be >= 1");
  if (codebook_size < 2) throw Error("codebook_size must be >= 2");
  if (max_iters < 1) throw Error("max_iters must be >= 1");
  if (!(tol > 0.0)) throw Error("tol must be > 0");
}

std::uint64_t TrainConfig::digest() const {
  std::uint64_t h = fnv1a64("rvq");
  const std::uint64_t fields[4] = {levels, codebook_size, max_iters, seed};
  h = fnv1a64(
      std::string_view(reinterpret_cast<const char*>(fields), sizeof(fields)),
      h);
  return fnv1a64(
      std::string_view(reinterpret_cast<const char*>(&tol), sizeof(tol)), h);
}

Quantizer::Quantizer(std::vector<Codebook> codebooks,
                     std::uint64_t config_digest)
    : codebooks_(std::move(codebooks)), config_digest_(config_digest) {
  if (codebooks_.empty()) throw Error("quantizer needs at least one level");
  dim_ = codebooks_[0].dim;
  if (dim_ == 0) throw Error("codebook dim must be >= 1");
  for (std::size_t l = 0; l < codebooks_.size(); ++l) {
    const Codebook& cb = codebooks_[l];
    if (cb.level != l)
      throw Error("codebook levels must be consecutive from 0");
    if (cb.dim != dim_) throw Error("codebook dims disagree");
    if (cb.entries.size() % dim_ != 0)
      throw Error("codebook entries are not a whole number of rows");
    if (cb.size() < 2)
      throw Error("codebook at level " + std::to_string(l) +
                  " must have >= 2 entries");
    for (float v : cb.entries)
      if (!std::isfinite(v))
        throw Error("non-finite codebook entry at level " + std::to_string(l));
    for (std::size_t c = 0; c < dim_; ++c) {
      if (cb.entries[c] != 0.0f)
        throw Error("entry 0 at level " + std::to_string(l) +
                    " must be the zero vector");
    }
  }
}

double default_noise_std(std::size_t dim) {
  if (dim == 0) throw Error("dim must be >= 1");
  return std::sqrt(2.0 / static_cast<double>(dim));
}

Quantizer train_quantizer(const FeatureSeq& data, const TrainConfig& config,
                          TrainDiagnostics* diagnostics, unsigned threads) {
  config.validate();
  data.validate();
  const std::size_t n = data.frame_count();
  if (n < config.codebook_size)
    throw Error("insufficient data: need at least " +
                std::to_string(config.codebook_size) + " frames, got " +
                std::to_string(n));
  const std::size_t dim = data.dim;
  const std::size_t k = config.codebook_size;

  std::vector<float> residuals = data.data;
  std::vector<Codebook> books;
  books.reserve(config.levels);
  if (diagnostics != nullptr) diagnostics->mse_per_iter.clear();

  for (std::uint32_t level = 0; level < config.levels; ++level) {
    std::mt19937_64 rng(mix_seed(config.seed, level));
    std::vector<float> entries = init_entries(residuals, n, dim, k, rng);
    std::vector<double>* mse_out = nullptr;
    if (diagnostics != nullptr) {
      diagnostics->mse_per_iter.emplace_back();
      mse_out = &diagnostics->mse_per_iter.back();
    }
    run_lloyd(entries, k, dim, residuals, n, config.max_iters, config.tol,
              true, mse_out, threads);
    consume_level(entries, k, dim, residuals, n, threads);
    books.push_back(Codebook{level, dim, std::move(entries)});
  }
  return Quantizer(std::move(books), config.digest());
}

SemanticTokenSeq encode(const Quantizer& q, const FeatureSeq& data,
                        unsigned threads) {
  data.validate();
  require_same_dim(q, data);
  const std::size_t n = data.frame_count();
  const std::size_t dim = q.dim();
  const std::size_t levels = q.levels();

  SemanticTokenSeq out;
  out.levels = levels;
  out.frames = n;
  out.indices.resize(levels * n);

  parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<float> r(dim);
    for (std::size_t i = begin; i < end; ++i) {
      std::memcpy(r.data(), data.data.data() + i * dim, dim * sizeof(float));
      for (std::size_t l = 0; l < levels; ++l) {
        const Codebook& cb = q.codebook(l);
        auto [j, d] = nearest_entry(cb.entries, cb.size(), dim, r.data());
        (void)d;
        out.indices[l * n + i] = j;
        const float* e = cb.entries.data() + static_cast<std::size_t>(j) * dim;
        for (std::size_t c = 0; c < dim; ++c) r[c] -= e[c];
      }
    }
  });
  return out;
}

SemanticTokenSeq encode_trace(const Quantizer& q, const FeatureSeq& data,
                              std::vector<double>& residual_norms,
                              unsigned threads) {
  data.validate();
  require_same_dim(q, data);
  const std::size_t n = data.frame_count();
  const std::size_t dim = q.dim();
  const std::size_t levels = q.levels();

  SemanticTokenSeq out;
  out.levels = levels;
  out.frames = n;
  out.indices.resize(levels * n);
  residual_norms.assign(n * levels, 0.0);

  parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<float> r(dim);
    for (std::size_t i = begin; i < end; ++i) {
      std::memcpy(r.data(), data.data.data() + i * dim, dim * sizeof(float));
      for (std::size_t l = 0; l < levels; ++l) {
        const Codebook& cb = q.codebook(l);
        auto [j, d] = nearest_entry(cb.entries, cb.size(), dim, r.data());
        (void)d;
        out.indices[l * n + i] = j;
        const float* e = cb.entries.data() + static_cast<std::size_t>(j) * dim;
        double norm2 = 0.0;
        for (std::size_t c = 0; c < dim; ++c) {
          r[c] -= e[c];
          norm2 += static_cast<double>(r[c]) * static_cast<double>(r[c]);
        }
        residual_norms[i * levels + l] = std::sqrt(norm2);
      }
    }
  });
  return out;
}

FeatureSeq decode(const Quantizer& q, const SemanticTokenSeq& tokens) {
  if (tokens.levels != q.levels())
    throw Error("token levels " + std::to_string(tokens.levels) +
                " do not match quantizer levels " +
                std::to_string(q.levels()));
  if (tokens.indices.size() != tokens.levels * tokens.frames)
    throw Error("token index storage does not match levels x frames");
  const std::size_t dim = q.dim();

  FeatureSeq out;
  out.dim = dim;
  out.data.resize(tokens.frames * dim);
  std::vector<double> acc(dim);
  for (std::size_t i = 0; i < tokens.frames; ++i) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t l = 0; l < tokens.levels; ++l) {
      const Codebook& cb = q.codebook(l);
      const std::uint32_t j = tokens.at(l, i);
      if (j >= cb.size())
        throw Error("token index " + std::to_string(j) + " out of range at level " +
                    std::to_string(l) + ", frame " + std::to_string(i));
      const float* e = cb.entries.data() + static_cast<std::size_t>(j) * dim;
      for (std::size_t c = 0; c < dim; ++c) acc[c] += static_cast<double>(e[c]);
    }
    float* o = out.data.data() + i * dim;
    for (std::size_t c = 0; c < dim; ++c) o[c] = static_cast<float>(acc[c]);
  }
  return out;
}

Quantizer expand_codebook(const Quantizer& q, std::uint32_t factor,
                          double noise_std, std::uint64_t seed) {
  if (factor < 2) throw Error("expansion factor must be >= 2");
  if (!(noise_std > 0.0)) throw Error("noise_std must be > 0");
  const std::size_t dim = q.dim();

  std::vector<Codebook> books;
  books.reserve(q.levels());
  for (std::size_t l = 0; l < q.levels(); ++l) {
    const Codebook& cb = q.codebook(l);
    const std::size_t k = cb.size();
    if (k * factor > kMaxSoundVocab)
      throw Error("expanded codebook size " + std::to_string(k * factor) +
                  " exceeds vocabulary bound " +
                  std::to_string(kMaxSoundVocab));
    std::vector<float> entries;
    entries.reserve(k * factor * dim);
    entries.insert(entries.end(), cb.entries.begin(), cb.entries.end());
    NormalSampler noise(mix_seed(seed, l));
    for (std::uint32_t copy = 1; copy < factor; ++copy) {
      for (std::size_t j = 0; j < k; ++j) {
        const float* src = cb.entries.data() + j * dim;
        for (std::size_t c = 0; c < dim; ++c) {
          entries.push_back(
              static_cast<float>(src[c] + noise.next() * noise_std));
        }
      }
    }
    // Duplicate of the reserved zero at the original index 0 would violate
    // the layout; only the first block keeps it, which insert() above did.
    books.push_back(
        Codebook{static_cast<std::uint32_t>(l), dim, std::move(entries)});
  }
  return Quantizer(std::move(books), mix_seed(mix_seed(q.config_digest(), 17),
                                              factor));
}

Quantizer naive_expand(const Quantizer& q, std::uint32_t factor,
                       std::uint64_t seed) {
  if (factor < 2) throw Error("expansion factor must be >= 2");
  const std::size_t dim = q.dim();
  const double scale = default_noise_std(dim);

  std::vector<Codebook> books;
  books.reserve(q.levels());
  for (std::size_t l = 0; l < q.levels(); ++l) {
    const Codebook& cb = q.codebook(l);
    const std::size_t k = cb.size();
    if (k * factor > kMaxSoundVocab)
      throw Error("expanded codebook size " + std::to_string(k * factor) +
                  " exceeds vocabulary bound " +
                  std::to_string(kMaxSoundVocab));
    std::vector<float> entries;
    entries.reserve(k * factor * dim);
    entries.insert(entries.end(), cb.entries.begin(), cb.entries.end());
    NormalSampler noise(mix_seed(seed, l));
    const std::size_t fresh = k * (factor - 1) * dim;
    for (std::size_t i = 0; i < fresh; ++i)
      entries.push_back(static_cast<float>(noise.next() * scale));
    books.push_back(
        Codebook{static_cast<std::uint32_t>(l), dim, std::move(entries)});
  }
  return Quantizer(std::move(books), mix_seed(mix_seed(q.config_digest(), 19),
                                              factor));
}

Quantizer refine(const Quantizer& q, const FeatureSeq& data,
                 std::uint32_t iters, unsigned threads) {
  if (iters < 1) throw Error("iters must be >= 1");
  data.validate();
  require_same_dim(q, data);
  const std::size_t n = data.frame_count();
  if (n == 0) throw Error("cannot refine on empty data");
  const std::size_t dim = q.dim();

  std::vector<float> residuals = data.data;
  std::vector<Codebook> books;
  books.reserve(q.levels());
  for (std::size_t l = 0; l < q.levels(); ++l) {
    std::vector<float> entries = q.codebook(l).entries;
    const std::size_t k = q.codebook(l).size();
    run_lloyd(entries, k, dim, residuals, n, iters, 0.0, false, nullptr,
              threads);
    consume_level(entries, k, dim, residuals, n, threads);
    books.push_back(
        Codebook{static_cast<std::uint32_t>(l), dim, std::move(entries)});
  }
  return Quantizer(std::move(books), mix_seed(q.config_digest(), 23));
}

UtilizationReport utilization(const Quantizer& q, const FeatureSeq& data,
                              unsigned threads) {
  if (data.frame_count() == 0)
    throw Error("utilization needs at least one frame");
  const SemanticTokenSeq tokens = encode(q, data, threads);

  UtilizationReport report;
  report.histograms.resize(q.levels());
  report.normalized_entropy.resize(q.levels());
  for (std::size_t l = 0; l < q.levels(); ++l) {
    const std::size_t k = q.codebook(l).size();
    auto& hist = report.histograms[l];
    hist.assign(k, 0);
    for (std::uint32_t idx : tokens.level(l)) ++hist[idx];

    const double total = static_cast<double>(tokens.frames);
    double h = 0.0;
    for (std::uint64_t count : hist) {
      if (count == 0) continue;
      const double p = static_cast<double>(count) / total;
      h -= p * std::log(p);
    }
    report.normalized_entropy[l] =
        k > 1 ? h / std::log(static_cast<double>(k)) : 0.0;
  }
  return report;
}

namespace {

constexpr char kQuantizerMagic[8] = {'S', 'E', 'M', 'T', 'O', 'K', 'Q', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f32(std::string& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

struct ByteReader {
  const std::string& buf;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > buf.size()) throw Error("truncated quantizer file");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos + i]))
           << (8 * i);
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[pos + i]))
           << (8 * i);
    pos += 8;
    return v;
  }
  float f32() {
    const std::uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
};

std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

void write_file_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("short write to " + path);
}

}  // namespace

void save_quantizer(const Quantizer& q, const std::string& path) {
  std::string out;
  out.append(kQuantizerMagic, sizeof(kQuantizerMagic));
  put_u32(out, static_cast<std::uint32_t>(q.dim()));
  put_u32(out, static_cast<std::uint32_t>(q.levels()));
  for (std::size_t l = 0; l < q.levels(); ++l)
    put_u32(out, static_cast<std::uint32_t>(q.codebook(l).size()));
  put_u64(out, q.config_digest());
  for (std::size_t l = 0; l < q.levels(); ++l)
    for (float v : q.codebook(l).entries) put_f32(out, v);
  write_file_bytes(path, out);
}

Quantizer load_quantizer(const std::string& path) {
  const std::string bytes = read_file_bytes(path);
  if (bytes.size() < sizeof(kQuantizerMagic) ||
      std::memcmp(bytes.data(), kQuantizerMagic, sizeof(kQuantizerMagic)) != 0)
    throw Error("bad quantizer magic in " + path);
  ByteReader r{bytes, sizeof(kQuantizerMagic)};
  const std::uint32_t dim = r.u32();
  const std::uint32_t levels = r.u32();
  if (dim == 0 || levels == 0) throw Error("bad quantizer header in " + path);
  std::vector<std::uint32_t> sizes(levels);
  for (auto& s : sizes) s = r.u32();
  const std::uint64_t digest = r.u64();

  std::vector<Codebook> books;
  books.reserve(levels);
  for (std::uint32_t l = 0; l < levels; ++l) {
    std::vector<float> entries(static_cast<std::size_t>(sizes[l]) * dim);
    for (auto& v : entries) v = r.f32();
    books.push_back(Codebook{l, dim, std::move(entries)});
  }
  if (r.pos != bytes.size())
    throw Error("trailing bytes in quantizer file " + path);
  return Quantizer(std::move(books), digest);
}

void save_features(const FeatureSeq& data, const std::string& path) {
  data.validate();
  std::string out;
  out.reserve(data.data.size() * 4);
  for (float v : data.data) put_f32(out, v);
  write_file_bytes(path, out);

  char meta[128];
  std::snprintf(meta, sizeof(meta), "dim=%zu\nframes=%zu\nframe_rate_hz=%.17g\n",
                data.dim, data.frame_count(), data.frame_rate_hz);
  write_file_bytes(path + ".meta", meta);
}

FeatureSeq load_features(const std::string& path) {
  const std::string meta = read_file_bytes(path + ".meta");
  FeatureSeq out;
  std::size_t frames = 0;
  bool have_dim = false, have_frames = false;
  std::istringstream lines(meta);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw Error("malformed meta line in " + path + ".meta: " + line);
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    try {
      if (key == "dim") {
        out.dim = std::stoul(value);
        have_dim = true;
      } else if (key == "frames") {
        frames = std::stoul(value);
        have_frames = true;
      } else if (key == "frame_rate_hz") {
        out.frame_rate_hz = std::stod(value);
      } else {
        throw Error("unknown meta key " + key + " in " + path + ".meta");
      }
    } catch (const std::invalid_argument&) {
      throw Error("bad meta value in " + path + ".meta: " + line);
    } catch (const std::out_of_range&) {
      throw Error("bad meta value in " + path + ".meta: " + line);
    }
  }
  if (!have_dim || !have_frames)
    throw Error("meta file " + path + ".meta must set dim and frames");

  const std::string bytes = read_file_bytes(path);
  if (bytes.size() != frames * out.dim * 4)
    throw Error("feature file " + path + " holds " +
                std::to_string(bytes.size()) + " bytes, expected " +
                std::to_string(frames * out.dim * 4));
  out.data.resize(frames * out.dim);
  ByteReader r{bytes, 0};
  for (auto& v : out.data) v = r.f32();
  out.validate();
  return out;
}

void save_tokens(const SemanticTokenSeq& tokens, const std::string& path) {
  std::string out;
  out += "levels=" + std::to_string(tokens.levels) +
         " frames=" + std::to_string(tokens.frames) + "\n";
  for (std::size_t i = 0; i < tokens.frames; ++i) {
    for (std::size_t l = 0; l < tokens.levels; ++l) {
      if (l > 0) out += ' ';
      out += std::to_string(tokens.at(l, i));
    }
    out += '\n';
  }
  write_file_bytes(path, out);
}

SemanticTokenSeq load_tokens(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::string header;
  if (!std::getline(in, header)) throw Error("empty token file " + path);
  std::size_t levels = 0, frames = 0;
  if (std::sscanf(header.c_str(), "levels=%zu frames=%zu", &levels, &frames) !=
      2)
    throw Error("bad token header in " + path + ": " + header);
  if (levels == 0) throw Error("token file " + path + " has zero levels");

  SemanticTokenSeq out;
  out.levels = levels;
  out.frames = frames;
  out.indices.resize(levels * frames);
  std::string line;
  for (std::size_t i = 0; i < frames; ++i) {
    if (!std::getline(in, line))
      throw Error("token file " + path + " ends early at frame " +
                  std::to_string(i));
    std::istringstream fields(line);
    for (std::size_t l = 0; l < levels; ++l) {
      std::uint64_t v = 0;
      if (!(fields >> v))
        throw Error("token file " + path + " frame " + std::to_string(i) +
                    " is missing level " + std::to_string(l));
      out.indices[l * frames + i] = static_cast<std::uint32_t>(v);
    }
    std::uint64_t extra;
    if (fields >> extra)
      throw Error("token file " + path + " frame " + std::to_string(i) +
                  " has extra fields");
  }
  return out;
}

}  // namespace semtok
