#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace semtok {

// Row-major frame matrix (frames x dim). Immutable once constructed; safe to
// share read-only across workers.
struct FeatureSeq {
  std::size_t dim = 0;
  std::vector<float> data;
  double frame_rate_hz = 50.0;  // informational

  std::size_t frame_count() const { return dim == 0 ? 0 : data.size() / dim; }
  std::span<const float> frame(std::size_t i) const {
    return {data.data() + i * dim, dim};
  }

  // Throws unless dim >= 1, data is a whole number of frames and all values
  // are finite.
  void validate() const;
};

// One quantization level: K entries of dimension dim. Entry 0 is the
// reserved zero vector and never learns.
struct Codebook {
  std::uint32_t level = 0;
  std::size_t dim = 0;
  std::vector<float> entries;  // K x dim, row-major

  std::size_t size() const { return dim == 0 ? 0 : entries.size() / dim; }
  std::span<const float> entry(std::size_t i) const {
    return {entries.data() + i * dim, dim};
  }
};

struct TrainConfig {
  std::uint32_t levels = 2;
  std::uint32_t codebook_size = 512;
  std::uint32_t max_iters = 25;
  double tol = 1e-4;  // relative MSE improvement threshold
  std::uint64_t seed = 0;

  void validate() const;
  std::uint64_t digest() const;
};

class Quantizer {
 public:
  // Validates: >= 1 codebook, consecutive levels from 0, shared dimension,
  // K >= 2 per level, exact zero entry at index 0, finite entries.
  explicit Quantizer(std::vector<Codebook> codebooks,
                     std::uint64_t config_digest = 0);

  std::size_t dim() const { return dim_; }
  std::size_t levels() const { return codebooks_.size(); }
  const Codebook& codebook(std::size_t level) const {
    return codebooks_[level];
  }
  std::uint64_t config_digest() const { return config_digest_; }

 private:
  std::vector<Codebook> codebooks_;
  std::size_t dim_ = 0;
  std::uint64_t config_digest_ = 0;
};

// Per-level index sequences for a frame sequence; level-major storage.
struct SemanticTokenSeq {
  std::size_t levels = 0;
  std::size_t frames = 0;
  std::vector<std::uint32_t> indices;  // levels x frames

  std::uint32_t at(std::size_t level, std::size_t frame) const {
    return indices[level * frames + frame];
  }
  std::span<const std::uint32_t> level(std::size_t l) const {
    return {indices.data() + l * frames, frames};
  }
};

struct TrainDiagnostics {
  // Assignment MSE before each update, per level.
  std::vector<std::vector<double>> mse_per_iter;
};

// Kaiming-style fan-in scale used when no explicit noise std is given.
double default_noise_std(std::size_t dim);

// Lloyd's k-means per level on the running residuals, K-1 learnable
// centroids plus the reserved zero entry. Deterministic given (data, config),
// independent of `threads`.
Quantizer train_quantizer(const FeatureSeq& data, const TrainConfig& config,
                          TrainDiagnostics* diagnostics = nullptr,
                          unsigned threads = 0);

// Per frame and level, the nearest entry by squared L2 (ties to the lowest
// index), subtracting the chosen entry from the running residual.
SemanticTokenSeq encode(const Quantizer& q, const FeatureSeq& data,
                        unsigned threads = 0);

// encode that also reports ||residual|| after each level, frames x levels
// row-major.
SemanticTokenSeq encode_trace(const Quantizer& q, const FeatureSeq& data,
                              std::vector<double>& residual_norms,
                              unsigned threads = 0);

// Sum of the selected entries across levels.
FeatureSeq decode(const Quantizer& q, const SemanticTokenSeq& tokens);

// Grows every level's codebook by `factor`: the original entries verbatim,
// followed by factor-1 noisy duplicates (per-coordinate seeded normal noise
// of std noise_std; pass <= 0 to reject). Only global index 0 stays the
// reserved zero; noisy copies of it become ordinary entries.
Quantizer expand_codebook(const Quantizer& q, std::uint32_t factor,
                          double noise_std, std::uint64_t seed);

// Rejected baseline: fresh Kaiming-scale entries instead of duplicates.
Quantizer naive_expand(const Quantizer& q, std::uint32_t factor,
                       std::uint64_t seed);

// Runs `iters` Lloyd passes per level starting from the current entries
// (no re-initialization); used to retrain after expansion.
Quantizer refine(const Quantizer& q, const FeatureSeq& data,
                 std::uint32_t iters, unsigned threads = 0);

struct UtilizationReport {
  std::vector<std::vector<std::uint64_t>> histograms;  // per level, K_l bins
  std::vector<double> normalized_entropy;              // H / log K_l, in [0,1]
};

UtilizationReport utilization(const Quantizer& q, const FeatureSeq& data,
                              unsigned threads = 0);

// -- persistence --------------------------------------------------------------
// Quantizer file: magic "SEMTOKQ1", then little-endian u32 dim, u32 levels,
// u32 K per level, u64 config digest, then float32 entries in level-major,
// index-major, coordinate-minor order.
void save_quantizer(const Quantizer& q, const std::string& path);
Quantizer load_quantizer(const std::string& path);

// Features: headerless little-endian float32 matrix at `path` plus a sidecar
// "<path>.meta" with dim=, frames= and optional frame_rate_hz= lines.
void save_features(const FeatureSeq& data, const std::string& path);
FeatureSeq load_features(const std::string& path);

// Token sequences as text: header "levels=L frames=T", then one line per
// frame with L indices.
void save_tokens(const SemanticTokenSeq& tokens, const std::string& path);
SemanticTokenSeq load_tokens(const std::string& path);

}  // namespace semtok
