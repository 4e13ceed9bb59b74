#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "semtok/durcodec.hpp"
#include "semtok/error.hpp"
#include "semtok/metrics.hpp"
#include "semtok/orchestrator.hpp"
#include "semtok/pipeline.hpp"
#include "semtok/rvq.hpp"
#include "semtok/text2sem.hpp"
#include "semtok/vocab.hpp"

namespace {

using namespace semtok;

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out) throw Error("short write to " + path);
}

// CLI11 honors set_config only on the root app, so subcommands merge their
// flat key=value files themselves: a value fills its option only when the
// command line left it unset, and unknown keys are rejected by name.
void apply_config(CLI::App* sub, const std::string& path) {
  if (path.empty()) return;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CLI::FileError::Missing(path);
  auto trim = [](const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return std::string();
    return s.substr(b, s.find_last_not_of(" \t") - b + 1);
  };
  std::map<CLI::Option*, std::vector<std::string>> pending;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#' || stripped[0] == ';') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw CLI::ConfigError(path + ":" + std::to_string(lineno) +
                             ": expected key=value");
    const std::string key = trim(stripped.substr(0, eq));
    std::string value = trim(stripped.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    CLI::Option* target = key.empty() || key == "config"
                              ? nullptr
                              : sub->get_option_no_throw("--" + key);
    if (target == nullptr)
      throw CLI::ConfigError(path + ": unknown config key '" + key + "'");
    // Command-line values win; only keys this file already touched may stack
    // further values (multi-value options list one value per line).
    if (target->count() > 0 && pending.find(target) == pending.end()) continue;
    pending[target].push_back(value);
  }
  for (auto& [target, values] : pending) {
    for (const std::string& v : values) target->add_result(v);
    target->run_callback();
  }
}

std::shared_ptr<std::string> add_config_opt(CLI::App* sub) {
  auto path = std::make_shared<std::string>();
  sub->add_option("--config", *path,
                  "flat key=value file (long option names without dashes) "
                  "filling in flags not set on the command line");
  return path;
}

void add_vocab_opts(CLI::App* sub, VocabSpec& vocab) {
  sub->add_option("--base-size", vocab.base_size,
                  "base LLM vocabulary size the new ids sit on top of");
  sub->add_option("--sound-count", vocab.sound_count,
                  "number of sound tokens");
  sub->add_option("--duration-max", vocab.duration_max,
                  "largest run a duration token may encode");
}

void add_filter_opts(CLI::App* sub, FilterConfig& cfg) {
  sub->add_option("--max-prompt-chars", cfg.max_prompt_chars,
                  "reject prompts with more raw characters");
  sub->add_option("--min-prompt-chars", cfg.min_prompt_chars,
                  "reject prompts with fewer normalized characters");
  sub->add_option("--max-nonalpha-ratio", cfg.max_nonalpha_ratio,
                  "reject prompts whose non-letter/digit/space share exceeds "
                  "this ratio");
}

std::string format_report(const std::string& metric,
                          const ErrorRateReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "metric=%s S=%llu I=%llu D=%llu N=%llu rate=%.6f",
                metric.c_str(),
                static_cast<unsigned long long>(r.substitutions),
                static_cast<unsigned long long>(r.insertions),
                static_cast<unsigned long long>(r.deletions),
                static_cast<unsigned long long>(r.reference_length), r.rate);
  return buf;
}

// Shared body of eval-wer/eval-cer: per-line reports pooled into one summary
// line on stdout, with an optional per-line report file.
int run_text_eval(const std::string& metric, const std::string& ref_path,
                  const std::string& hyp_path, const std::string& out_path) {
  const auto refs = read_lines(ref_path);
  const auto hyps = read_lines(hyp_path);
  if (refs.size() != hyps.size())
    throw Error("line counts differ: " + ref_path + " has " +
                std::to_string(refs.size()) + ", " + hyp_path + " has " +
                std::to_string(hyps.size()));

  std::vector<ErrorRateReport> reports;
  reports.reserve(refs.size());
  std::string per_line;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    try {
      reports.push_back(metric == "wer" ? wer(refs[i], hyps[i])
                                        : cer(refs[i], hyps[i]));
    } catch (const Error& e) {
      throw Error(ref_path + ":" + std::to_string(i + 1) + ": " + e.what());
    }
    per_line += format_report(metric, reports.back()) + "\n";
  }
  const ErrorRateReport total = aggregate(reports);
  if (!out_path.empty())
    write_text(out_path, per_line + format_report(metric, total) + "\n");
  std::cout << format_report(metric, total) << "\n";
  return 0;
}

TokenStream parse_stream_line(const VocabSpec& vocab, const std::string& line,
                              const std::string& path, std::size_t lineno) {
  try {
    return parse(vocab, line).stream;
  } catch (const Error& e) {
    throw Error(path + ":" + std::to_string(lineno) + ": " + e.what());
  }
}

struct TrainQuantizerOpts {
  std::string in, out;
  TrainConfig cfg;
  unsigned workers = 0;
};

struct ExpandOpts {
  std::string in, out, init = "duplicate";
  std::uint32_t factor = 4;
  double noise_std = -1.0;  // sentinel: sqrt(2/dim) of the loaded quantizer
  std::uint64_t seed = 0;
};

struct EncodeOpts {
  std::string quantizer, in, out, residuals;
  unsigned workers = 0;
};

struct DecodeOpts {
  std::string quantizer, in, out;
};

struct SynthOpts {
  std::string in, text, out;
  OracleConfig cfg;
};

struct TrainMapperOpts {
  std::string in, out;
  std::string alphabet = "abcdefghijklmnopqrstuvwxyz ";
  VocabSpec vocab;
  unsigned workers = 0;
};

struct TranslateOpts {
  std::string mapper, in, out;
  VocabSpec vocab;
};

struct FilterOpts {
  std::vector<std::string> in;
  std::string out, rejects;
  FilterConfig cfg;
};

struct GenDatasetOpts {
  JobSpec spec;
  std::string mapper;
};

struct EvalTextOpts {
  std::string ref, hyp, out;
};

struct EvalTerOpts {
  std::string ref, hyp, out;
  VocabSpec vocab;
};

struct StatsOpts {
  std::vector<std::string> in;
  std::string mapper;
  FilterConfig filter;
  VocabSpec vocab;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "semtok: discrete semantic-token tooling. Stages: quantize features "
      "(train-quantizer, expand-codebook, encode, decode), synthesize "
      "speech-like features from text (synth), learn and apply the "
      "text-to-token mapper (train-mapper, translate), prepare instruction "
      "datasets (filter, gen-dataset, stats) and score outputs (eval-wer, "
      "eval-cer, eval-ter)."};
  app.require_subcommand(1);

  std::function<int()> action;

  {
    auto opt = std::make_shared<TrainQuantizerOpts>();
    auto* sub = app.add_subcommand("train-quantizer",
                                   "fit residual codebooks to a feature file");
    auto config = add_config_opt(sub);
    sub->add_option("--in", opt->in, "input feature file")->required();
    sub->add_option("--out", opt->out, "output quantizer file")->required();
    sub->add_option("--levels", opt->cfg.levels, "quantization levels");
    sub->add_option("--codebook-size", opt->cfg.codebook_size,
                    "entries per level, reserved zero included");
    sub->add_option("--max-iters", opt->cfg.max_iters,
                    "k-means iteration cap per level");
    sub->add_option("--tol", opt->cfg.tol,
                    "relative MSE improvement stop threshold");
    sub->add_option("--seed", opt->cfg.seed, "training seed");
    sub->add_option("--workers", opt->workers,
                    "threads for assignment steps, 0 = hardware");
    sub->callback([&action, opt, sub, config] {
      apply_config(sub, *config);
      action = [opt]() -> int {
        const FeatureSeq data = load_features(opt->in);
        TrainDiagnostics diag;
        const Quantizer q =
            train_quantizer(data, opt->cfg, &diag, opt->workers);
        save_quantizer(q, opt->out);
        for (std::size_t l = 0; l < diag.mse_per_iter.size(); ++l) {
          const auto& trace = diag.mse_per_iter[l];
          std::printf("level %zu: %zu iterations, final mse %.6g\n", l,
                      trace.size(), trace.empty() ? 0.0 : trace.back());
        }
        std::printf("saved %zu-level quantizer (dim %zu, K %zu) to %s\n",
                    q.levels(), q.dim(), q.codebook(0).size(),
                    opt->out.c_str());
        return 0;
      };
    });
  }

  {
    auto opt = std::make_shared<ExpandOpts>();
    auto* sub = app.add_subcommand(
        "expand-codebook", "grow every codebook level by an integer factor");
    auto config = add_config_opt(sub);
    sub->add_option("--quantizer", opt->in, "input quantizer file")
        ->required();
    sub->add_option("--out", opt->out, "output quantizer file")->required();
    sub->add_option("--factor", opt->factor, "expansion factor (>= 2)");
    sub->add_option("--init", opt->init,
                    "duplicate (noisy copies of trained entries) or naive "
                    "(fresh random entries)")
        ->check(CLI::IsMember({"duplicate", "naive"}));
    sub->add_option("--noise-std", opt->noise_std,
                    "noise std for duplicate init; default sqrt(2/dim)");
    sub->add_option("--seed", opt->seed, "noise seed");
    sub->callback([&action, opt, sub, config] {
      apply_config(sub, *config);
      action = [opt]() -> int {
        const Quantizer q = load_quantizer(opt->in);
        const double std_used =
            opt->noise_std > 0.0 ? opt->noise_std : default_noise_std(q.dim());
        const Quantizer grown =
            opt->init == "duplicate"
                ? expand_codebook(q, opt->factor, std_used, opt->seed)
                : naive_expand(q, opt->factor, opt->seed);
        save_quantizer(grown, opt->out);
        std::printf("expanded K %zu -> %zu (%s init) into %s\n",
                    q.codebook(0).size(), grown.codebook(0).size(),
                    opt->init.c_str(), opt->out.c_str());
        return 0;
      };
    });
  }

  {
    auto opt = std::make_shared<EncodeOpts>();
    auto* sub = app.add_subcommand(
        "encode", "quantize a feature file into per-level token indices");
    auto config = add_config_opt(sub);
    sub->add_option("--quantizer", opt->quantizer, "quantizer file")
        ->required();
    sub->add_option("--in", opt->in, "input feature file")->required();
    sub->add_option("--out", opt->out, "output token file")->required();
    sub->add_option("--residuals", opt->residuals,
                    "optional per-frame residual-norm report (one line per "
                    "frame, one norm per level)");
    sub->add_option("--workers", opt->workers, "threads, 0 = hardware");
    sub->callback([&action, opt, sub, config] {
      apply_config(sub, *config);
      action = [opt]() -> int {
        const Quantizer q = load_quantizer(opt->quantizer);
        const FeatureSeq data = load_features(opt->in);
        SemanticTokenSeq tokens;
        if (opt->residuals.empty()) {
          tokens = encode(q, data, opt->workers);
        } else {
          std::vector<double> norms;
          tokens = encode_trace(q, data, norms, opt->workers);
          std::string report;
          char buf[32];
          for (std::size_t i = 0; i < tokens.frames; ++i) {
            for (std::size_t l = 0; l < tokens.levels; ++l) {
              if (l > 0) report += ' ';
              std::snprintf(buf, sizeof(buf), "%.9e",
                            norms[i * tokens.levels + l]);
              report += buf;
            }
            report += '\n';
          }
          write_text(opt->residuals, report);
        }
        save_tokens(tokens, opt->out);
        std::printf("encoded %zu frames x %zu levels into %s\n", tokens.frames,
                    tokens.levels, opt->out.c_str());
        return 0;
      };
    });
  }

  {
    auto opt = std::make_shared<DecodeOpts>();
    auto* sub = app.add_subcommand(
        "decode", "reconstruct features from per-level token indices");
    auto config = add_config_opt(sub);
    sub->add_option("--quantizer", opt->quantizer, "quantizer file")
        ->required();
    sub->add_option("--in", opt->in, "input token file")->required();
    sub->add_option("--out", opt->out, "output feature file")->required();
    sub->callback([&action, opt, sub, config] {
      apply_config(sub, *config);
      action = [opt]() -> int {
        const Quantizer q = load_quantizer(opt->quantizer);
        const SemanticTokenSeq tokens = load_tokens(opt->in);
        const FeatureSeq recon = decode(q, tokens);
        save_features(recon, opt->out);
        std::printf("decoded %zu frames (dim %zu) into %s\n",
                    recon.frame_count(), recon.dim, opt->out.c_str());
        return 0;
      };
    });
  }

  {
    auto opt = std::make_shared<SynthOpts>();
    auto* sub = app.add_subcommand(
        "synth", "synthesize oracle speech features for a text");
    auto config = add_config_opt(sub);
    sub->add_option("--in", opt->in,
                    "text file; lines are joined with single spaces");
    sub->add_option("--text", opt->text, "literal text instead of --in");
    sub->add_option("--out", opt->out, "output feature file")->required();
    sub->add_option("--dim", opt->cfg.dim, "feature dimension");
    sub->add_option("--noise-std", opt->cfg.noise_std,
                    "per-frame Gaussian noise std");
    sub->add_option("--seed", opt->cfg.seed, "oracle seed");
    sub->add_option("--alphabet", opt->cfg.alphabet, "allowed characters");
    sub->callback([&action, opt, sub, config] {
      apply_config(sub, *config);
      const bool have_in = sub->count("--in") > 0;
      const bool have_text = sub->count("--text") > 0;
      if (have_in == have_text)
        throw CLI::ValidationError("synth",
                                   "pass exactly one of --in and --text");
      action = [opt, have_in]() -> int {
        std::string text = opt->text;
        if (have_in) {
          const auto lines = read_lines(opt->in);
          text.clear();
          for (std::size_t i = 0; i < lines.size(); ++i) {
            if (i > 0) text += ' ';
            text += lines[i];
          }
        }
        const FeatureSeq frames = speak(text, opt->cfg);
        save_features(frames, opt->out);
        std::printf("synthesized %zu frames (dim %zu) into %s\n",
                    frames.frame_count(), frames.dim, opt->out.c_str());
        return 0;
      };
    });
  }

  {
    auto opt = std::make_shared<TrainMapperOpts>();
    auto* sub = app.add_subcommand(
        "train-mapper",
        "learn the per-character emission table from text<TAB>markup lines");
    auto config = add_config_opt(sub);
    sub->add_option("--in", opt->in, "pairs file: text, TAB, stream markup")
        ->required();
    sub->add_option("--out", opt->out, "output mapper file")->required();
    sub->add_option("--alphabet", opt->alphabet, "mapper alphabet");
    add_vocab_opts(sub, opt->vocab);
    sub->add_option("--workers", opt->workers, "threads, 0 = hardware");
    sub->callback([&action, opt, sub, config] {
      apply_config(sub, *config);
      action = [opt]() -> int {
        const auto lines = read_lines(opt->in);
        std::vector<TrainPair> pairs;
        pairs.reserve(lines.size());
        for (std::size_t i = 0; i < lines.size(); ++i) {
          if (lines[i].empty()) continue;
          const std::size_t tab = lines[i].find('\t');
          if (tab == std::string::npos)
            throw Error(opt->in + ":" + std::to_string(i + 1) +
                        ": expected text<TAB>markup");
          pairs.push_back(
              TrainPair{lines[i].substr(0, tab),
                        parse_stream_line(opt->vocab, lines[i].substr(tab + 1),
                                          opt->in, i + 1)});
        }
        const MapperModel model =
            train_mapper(pairs, opt->alphabet, opt->workers);
        save_mapper(model, opt->out);
        std::printf(
            "trained on %zu pairs: %u iterations, %s, %llu skipped\n",
            pairs.size(), model.diagnostics.iterations,
            model.diagnostics.converged ? "converged" : "iteration cap hit",
            static_cast<unsigned long long>(model.diagnostics.skipped_pairs));
        return 0;
      };
    });
  }

  {
    auto opt = std::make_shared<TranslateOpts>();
    auto* sub = app.add_subcommand(
        "translate", "map text lines to wrapped token-stream markup lines");
    auto config = add_config_opt(sub);
    sub->add_option("--mapper", opt->mapper, "mapper file")->required();
    sub->add_option("--in", opt->in, "input text file, one text per line")
        ->required();
    sub->add_option("--out", opt->out, "output markup file")->required();
    add_vocab_opts(sub, opt->vocab);
    sub->callback([&action, opt, sub, config] {
      apply_config(sub, *config);
      action = [opt]() -> int {
        const MapperModel model = load_mapper(opt->mapper);
        const DurCodecConfig codec{opt->vocab.sound_count,
                                   opt->vocab.duration_max};
        const auto lines = read_lines(opt->in);
        std::string out;
        for (std::size_t i = 0; i < lines.size(); ++i) {
          try {
            out += render(opt->vocab, translate(model, lines[i], codec), true);
          } catch (const Error& e) {
            throw Error(opt->in + ":" + std::to_string(i + 1) + ": " +
                        e.what());
          }
          out += '\n';
        }
        write_text(opt->out, out);
        std::printf("translated %zu lines into %s\n", lines.size(),
                    opt->out.c_str());
        return 0;
      };
    });
  }

  {
    auto opt = std::make_shared<FilterOpts>();
    auto* sub = app.add_subcommand(
        "filter", "split dataset records into accepted and rejected");
    auto config = add_config_opt(sub);
    sub->add_option("--in", opt->in, "input dataset file(s)")->required();
    sub->add_option("--out", opt->out, "accepted records file")->required();
    sub->add_option("--rejects", opt->rejects,
                    "reject log (default: <out>.rejects)");
    add_filter_opts(sub, opt->cfg);
    sub->callback([&action, opt, sub, config] {
      apply_config(sub, *config);
      action = [opt]() -> int {
        const auto records = read_dataset(opt->in);
        std::vector<DatasetRecord> accepted;
        std::string rejects;
        for (const DatasetRecord& rec : records) {
          const Verdict v = filter(rec, opt->cfg);
          if (v.accepted) {
            accepted.push_back(rec);
          } else {
            rejects += rec.id;
            rejects += '\t';
            rejects += reason_code(v.reason);
            rejects += '\n';
          }
        }
        write_dataset(accepted, opt->out);
        write_text(opt->rejects.empty() ? opt->out + ".rejects" : opt->rejects,
                   rejects);
        std::printf("accepted %zu of %zu records into %s\n", accepted.size(),
                    records.size(), opt->out.c_str());
        return 0;
      };
    });
  }

  {
    auto opt = std::make_shared<GenDatasetOpts>();
    auto* sub = app.add_subcommand(
        "gen-dataset",
        "filter and translate a dataset on a worker pool, in input order");
    auto config = add_config_opt(sub);
    sub->add_option("--in", opt->spec.inputs, "input dataset file(s)")
        ->required();
    sub->add_option("--out", opt->spec.output, "output dataset file")
        ->required();
    sub->add_option("--rejects", opt->spec.reject_log,
                    "reject log (default: <out>.rejects)");
    sub->add_option("--mapper", opt->mapper, "mapper file")->required();
    sub->add_option("--workers", opt->spec.workers, "worker threads");
    sub->add_option("--batch-size", opt->spec.batch_size,
                    "records per batch");
    sub->add_option("--max-retries", opt->spec.max_retries,
                    "extra attempts per failing batch");
    sub->add_option("--failure-rate", opt->spec.failure_injection_rate,
                    "injected batch failure probability (testing)");
    sub->add_option("--failure-seed", opt->spec.failure_seed,
                    "failure injection seed");
    add_filter_opts(sub, opt->spec.filter);
    add_vocab_opts(sub, opt->spec.vocab);
    sub->callback([&action, opt, sub, config] {
      apply_config(sub, *config);
      action = [opt]() -> int {
        const MapperModel model = load_mapper(opt->mapper);
        const JobReport report = run_job(opt->spec, model);
        std::fputs(report.summary().c_str(), stdout);
        return 0;
      };
    });
  }

  {
    auto opt = std::make_shared<EvalTextOpts>();
    auto* sub = app.add_subcommand(
        "eval-wer", "word error rate of line-aligned hypothesis vs reference");
    auto config = add_config_opt(sub);
    sub->add_option("--ref", opt->ref, "reference text file")->required();
    sub->add_option("--hyp", opt->hyp, "hypothesis text file")->required();
    sub->add_option("--out", opt->out, "optional per-line report file");
    sub->callback([&action, opt, sub, config] {
      apply_config(sub, *config);
      action = [opt] { return run_text_eval("wer", opt->ref, opt->hyp,
                                            opt->out); };
    });
  }

  {
    auto opt = std::make_shared<EvalTextOpts>();
    auto* sub = app.add_subcommand(
        "eval-cer",
        "character error rate of line-aligned hypothesis vs reference");
    auto config = add_config_opt(sub);
    sub->add_option("--ref", opt->ref, "reference text file")->required();
    sub->add_option("--hyp", opt->hyp, "hypothesis text file")->required();
    sub->add_option("--out", opt->out, "optional per-line report file");
    sub->callback([&action, opt, sub, config] {
      apply_config(sub, *config);
      action = [opt] { return run_text_eval("cer", opt->ref, opt->hyp,
                                            opt->out); };
    });
  }

  {
    auto opt = std::make_shared<EvalTerOpts>();
    auto* sub = app.add_subcommand(
        "eval-ter",
        "token error rate of line-aligned stream markup vs reference");
    auto config = add_config_opt(sub);
    sub->add_option("--ref", opt->ref, "reference markup file")->required();
    sub->add_option("--hyp", opt->hyp, "hypothesis markup file")->required();
    sub->add_option("--out", opt->out, "optional per-line report file");
    add_vocab_opts(sub, opt->vocab);
    sub->callback([&action, opt, sub, config] {
      apply_config(sub, *config);
      action = [opt]() -> int {
        const auto refs = read_lines(opt->ref);
        const auto hyps = read_lines(opt->hyp);
        if (refs.size() != hyps.size())
          throw Error("line counts differ: " + opt->ref + " has " +
                      std::to_string(refs.size()) + ", " + opt->hyp + " has " +
                      std::to_string(hyps.size()));
        std::vector<ErrorRateReport> reports;
        reports.reserve(refs.size());
        std::string per_line;
        for (std::size_t i = 0; i < refs.size(); ++i) {
          const TokenStream r =
              parse_stream_line(opt->vocab, refs[i], opt->ref, i + 1);
          const TokenStream h =
              parse_stream_line(opt->vocab, hyps[i], opt->hyp, i + 1);
          try {
            reports.push_back(ter(r, h));
          } catch (const Error& e) {
            throw Error(opt->ref + ":" + std::to_string(i + 1) + ": " +
                        e.what());
          }
          per_line += format_report("ter", reports.back()) + "\n";
        }
        const ErrorRateReport total = aggregate(reports);
        if (!opt->out.empty())
          write_text(opt->out, per_line + format_report("ter", total) + "\n");
        std::cout << format_report("ter", total) << "\n";
        return 0;
      };
    });
  }

  {
    auto opt = std::make_shared<StatsOpts>();
    auto* sub = app.add_subcommand(
        "stats", "verdict counts, token-length histogram, compression ratio");
    auto config = add_config_opt(sub);
    sub->add_option("--in", opt->in, "input dataset file(s)")->required();
    sub->add_option("--mapper", opt->mapper, "mapper file")->required();
    add_filter_opts(sub, opt->filter);
    add_vocab_opts(sub, opt->vocab);
    sub->callback([&action, opt, sub, config] {
      apply_config(sub, *config);
      action = [opt]() -> int {
        const MapperModel model = load_mapper(opt->mapper);
        const auto records = read_dataset(opt->in);
        const DatasetStats stats =
            dataset_stats(records, opt->filter, model, opt->vocab);
        std::printf("input=%llu accepted=%llu rejected=%llu\n",
                    static_cast<unsigned long long>(stats.input_count),
                    static_cast<unsigned long long>(stats.accepted),
                    static_cast<unsigned long long>(stats.rejected_total()));
        for (const auto& [code, count] : stats.rejected_by_reason)
          std::printf("reject[%s]=%llu\n", code.c_str(),
                      static_cast<unsigned long long>(count));
        for (std::size_t b = 0; b < stats.token_length_histogram.size(); ++b)
          std::printf("tokens[%zu,%zu)=%llu\n", 16 * b, 16 * (b + 1),
                      static_cast<unsigned long long>(
                          stats.token_length_histogram[b]));
        std::printf("mean_compression_ratio=%.6f\n",
                    stats.mean_compression_ratio);
        return 0;
      };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  if (!action) {
    std::cerr << "no subcommand selected\n";
    return 1;
  }
  try {
    return action();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
