#include <sys/wait.h>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "semtok/durcodec.hpp"
#include "semtok/error.hpp"
#include "semtok/metrics.hpp"
#include "semtok/orchestrator.hpp"
#include "semtok/pipeline.hpp"
#include "semtok/rvq.hpp"
#include "semtok/text2sem.hpp"
#include "semtok/vocab.hpp"

using namespace semtok;

namespace {

std::string bin() {
  const char* path = std::getenv("SEMTOK_BIN");
  REQUIRE_MESSAGE(path != nullptr,
                  "SEMTOK_BIN must point at the semtok binary");
  return path;
}

std::filesystem::path temp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "semtok_cli";
  std::filesystem::create_directories(dir);
  return dir / name;
}

// Runs the binary with stdout/stderr captured; returns the exit code.
int run(const std::string& args, const std::string& tag) {
  const std::string cmd = bin() + " " + args + " > " +
                          temp_path(tag + ".out").string() + " 2> " +
                          temp_path(tag + ".err").string();
  const int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  REQUIRE(WIFEXITED(rc));
  return WEXITSTATUS(rc);
}

std::string read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(bool(in));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string stdout_of(const std::string& tag) {
  return read_bytes(temp_path(tag + ".out"));
}

std::string stderr_of(const std::string& tag) {
  return read_bytes(temp_path(tag + ".err"));
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  REQUIRE(bool(out));
  out << text;
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

MapperModel toy_model() {
  MapperModel m;
  for (char c : std::string("abcdefghijklmnopqrstuvwxyz ")) {
    const auto cp = static_cast<char32_t>(c);
    m.alphabet.push_back(cp);
    m.table[cp] = Emission{1 + static_cast<std::uint32_t>(c) % 50,
                           2 + static_cast<std::uint32_t>(c) % 3};
  }
  std::sort(m.alphabet.begin(), m.alphabet.end());
  return m;
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

std::vector<DatasetRecord> small_corpus() {
  const std::vector<std::string> prompts = {
      "tell me a story about the sea",
      "the wind and the sun",
      std::string(600, 'a'),
      "compute \\frac{1}{2} now",
      "meet me at 5 pm",
      "\xe5\x86\x8d\xe8\xa7\x81 world",
      "a quiet walk under the moon",
      "?!?!",
      "price is $5 and $7",
      "one equals sign a = b is fine",
  };
  std::vector<DatasetRecord> out;
  for (std::size_t i = 0; i < 40; ++i) {
    DatasetRecord r;
    char id[16];
    std::snprintf(id, sizeof(id), "c-%03zu", i);
    r.id = id;
    r.prompt = prompts[i % prompts.size()];
    r.response = "resp " + std::to_string(i);
    r.lang = "en";
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

TEST_CASE("exit codes separate usage errors from runtime errors") {
  CHECK(run("--help", "help") == 0);
  CHECK(contains(stdout_of("help"), "train-quantizer"));
  CHECK(run("synth --help", "synth_help") == 0);

  CHECK(run("", "nosub") == 1);
  CHECK(run("frobnicate", "badsub") == 1);
  CHECK(run("synth --bogus --text hi --out x.bin", "badflag") == 1);
  CHECK(run("encode --in a --out b", "missingreq") == 1);
  CHECK(run("expand-codebook --quantizer a --out b --init bogus",
            "badchoice") == 1);

  const auto missing = temp_path("no_such_file.txt");
  std::filesystem::remove(missing);
  CHECK(run("eval-wer --ref " + missing.string() + " --hyp " +
                missing.string(),
            "missingfile") == 2);
  CHECK(contains(stderr_of("missingfile"), "cannot open"));
}

TEST_CASE("synth encode decode round trip matches the library") {
  const auto lines = temp_path("synth_lines.txt");
  write_text(lines, "hello\nworld\n");
  const auto feats_a = temp_path("synth_a.bin");
  const auto feats_b = temp_path("synth_b.bin");

  CHECK(run("synth --in " + lines.string() + " --out " + feats_a.string() +
                " --dim 24 --seed 9",
            "synth_in") == 0);
  CHECK(run("synth --text \"hello world\" --out " + feats_b.string() +
                " --dim 24 --seed 9",
            "synth_text") == 0);
  // Input lines join with single spaces, so both routes produce one file.
  CHECK(read_bytes(feats_a) == read_bytes(feats_b));
  CHECK(read_bytes(feats_a.string() + ".meta") ==
        read_bytes(feats_b.string() + ".meta"));
  CHECK(run("synth --out nowhere.bin", "synth_neither") == 1);
  CHECK(run("synth --in " + lines.string() + " --text hi --out x.bin",
            "synth_both") == 1);

  OracleConfig oracle;
  oracle.dim = 24;
  oracle.seed = 9;
  const FeatureSeq expect_feats = speak("hello world", oracle);
  const FeatureSeq got_feats = load_features(feats_a.string());
  CHECK(got_feats.dim == expect_feats.dim);
  CHECK(got_feats.data == expect_feats.data);

  const auto qpath = temp_path("cli_q.bin");
  CHECK(run("train-quantizer --in " + feats_a.string() + " --out " +
                qpath.string() +
                " --levels 2 --codebook-size 8 --max-iters 10 --seed 3",
            "trainq") == 0);
  CHECK(contains(stdout_of("trainq"), "saved 2-level quantizer"));

  TrainConfig tc;
  tc.levels = 2;
  tc.codebook_size = 8;
  tc.max_iters = 10;
  tc.seed = 3;
  const Quantizer expect_q = train_quantizer(expect_feats, tc);
  const auto qcheck = temp_path("cli_q_expect.bin");
  save_quantizer(expect_q, qcheck.string());
  CHECK(read_bytes(qpath) == read_bytes(qcheck));

  const auto toks = temp_path("cli_toks.txt");
  const auto res = temp_path("cli_res.txt");
  CHECK(run("encode --quantizer " + qpath.string() + " --in " +
                feats_a.string() + " --out " + toks.string() +
                " --residuals " + res.string(),
            "encode") == 0);

  const SemanticTokenSeq got_toks = load_tokens(toks.string());
  std::vector<double> norms;
  const SemanticTokenSeq expect_toks =
      encode_trace(expect_q, expect_feats, norms);
  CHECK(got_toks.levels == expect_toks.levels);
  CHECK(got_toks.frames == expect_toks.frames);
  CHECK(got_toks.indices == expect_toks.indices);

  std::ifstream res_in(res);
  REQUIRE(bool(res_in));
  std::size_t frame = 0;
  std::string line;
  while (std::getline(res_in, line)) {
    std::istringstream fields(line);
    double prev = 0.0;
    for (std::size_t l = 0; l < expect_toks.levels; ++l) {
      double v = -1.0;
      REQUIRE(bool(fields >> v));
      CHECK(v == doctest::Approx(norms[frame * expect_toks.levels + l])
                     .epsilon(1e-6));
      if (l > 0) CHECK(v <= prev + 1e-12);
      prev = v;
    }
    ++frame;
  }
  CHECK(frame == expect_toks.frames);

  const auto recon = temp_path("cli_recon.bin");
  CHECK(run("decode --quantizer " + qpath.string() + " --in " + toks.string() +
                " --out " + recon.string(),
            "decode") == 0);
  const FeatureSeq got_recon = load_features(recon.string());
  const FeatureSeq expect_recon = decode(expect_q, expect_toks);
  CHECK(got_recon.dim == expect_recon.dim);
  CHECK(got_recon.data == expect_recon.data);
}

TEST_CASE("text metrics commands score line-aligned files") {
  const auto ref = temp_path("eval_ref.txt");
  const auto hyp = temp_path("eval_hyp.txt");
  write_text(ref, "hello world\nthe sea wind\n");
  write_text(hyp, "hello world\nthe sea wind\n");

  const auto report = temp_path("eval_report.txt");
  CHECK(run("eval-wer --ref " + ref.string() + " --hyp " + hyp.string() +
                " --out " + report.string(),
            "wer_same") == 0);
  CHECK(stdout_of("wer_same") == "metric=wer S=0 I=0 D=0 N=5 rate=0.000000\n");
  // Two per-line rows plus the pooled total.
  const std::string report_text = read_bytes(report);
  CHECK(std::count(report_text.begin(), report_text.end(), '\n') == 3);

  write_text(hyp, "hello world\nthe sea breeze\n");
  CHECK(run("eval-wer --ref " + ref.string() + " --hyp " + hyp.string(),
            "wer_sub") == 0);
  CHECK(stdout_of("wer_sub") == "metric=wer S=1 I=0 D=0 N=5 rate=0.200000\n");

  write_text(ref, "abc\n");
  write_text(hyp, "adc\n");
  CHECK(run("eval-cer --ref " + ref.string() + " --hyp " + hyp.string(),
            "cer_sub") == 0);
  CHECK(stdout_of("cer_sub") == "metric=cer S=1 I=0 D=0 N=3 rate=0.333333\n");

  write_text(hyp, "adc\nextra\n");
  CHECK(run("eval-cer --ref " + ref.string() + " --hyp " + hyp.string(),
            "cer_mismatch") == 2);
  CHECK(contains(stderr_of("cer_mismatch"), "line counts differ"));

  write_text(ref, "!!!\n");
  write_text(hyp, "anything\n");
  CHECK(run("eval-wer --ref " + ref.string() + " --hyp " + hyp.string(),
            "wer_empty_ref") == 2);
  CHECK(contains(stderr_of("wer_empty_ref"), ":1:"));
  CHECK(contains(stderr_of("wer_empty_ref"), "undefined rate"));
}

TEST_CASE("translate renders mapper output and eval-ter scores it") {
  const MapperModel model = toy_model();
  const auto mapper = temp_path("cli_mapper.txt");
  save_mapper(model, mapper.string());

  const auto texts = temp_path("cli_texts.txt");
  write_text(texts, "hello world\nsea wind\n");
  const auto markup = temp_path("cli_markup.txt");
  CHECK(run("translate --mapper " + mapper.string() + " --in " +
                texts.string() + " --out " + markup.string(),
            "translate") == 0);

  const VocabSpec vocab;
  const DurCodecConfig codec{vocab.sound_count, vocab.duration_max};
  const std::string expect =
      render(vocab, translate(model, "hello world", codec), true) + "\n" +
      render(vocab, translate(model, "sea wind", codec), true) + "\n";
  CHECK(read_bytes(markup) == expect);

  CHECK(run("eval-ter --ref " + markup.string() + " --hyp " + markup.string(),
            "ter_same") == 0);
  {
    std::vector<ErrorRateReport> reports = {
        ter(translate(model, "hello world", codec),
            translate(model, "hello world", codec)),
        ter(translate(model, "sea wind", codec),
            translate(model, "sea wind", codec))};
    CHECK(stdout_of("ter_same") ==
          format_report("ter", aggregate(reports)) + "\n");
  }

  const auto hyp = temp_path("cli_markup_hyp.txt");
  write_text(hyp,
             render(vocab, translate(model, "hello world", codec), true) +
                 "\n" +
                 render(vocab, translate(model, "sea mind", codec), true) +
                 "\n");
  CHECK(run("eval-ter --ref " + markup.string() + " --hyp " + hyp.string(),
            "ter_diff") == 0);
  {
    std::vector<ErrorRateReport> reports = {
        ter(translate(model, "hello world", codec),
            translate(model, "hello world", codec)),
        ter(translate(model, "sea wind", codec),
            translate(model, "sea mind", codec))};
    CHECK(stdout_of("ter_diff") ==
          format_report("ter", aggregate(reports)) + "\n");
  }

  write_text(hyp, "garbage\n<|sound_0001|>\n");
  CHECK(run("eval-ter --ref " + markup.string() + " --hyp " + hyp.string(),
            "ter_bad") == 2);
  CHECK(contains(stderr_of("ter_bad"), ":1:"));
}

TEST_CASE("filter splits a dataset exactly like the library") {
  const auto corpus = small_corpus();
  const auto ds = temp_path("cli_ds.tsv");
  write_dataset(corpus, ds.string());

  const auto acc = temp_path("cli_acc.tsv");
  CHECK(run("filter --in " + ds.string() + " --out " + acc.string(),
            "filter") == 0);

  const FilterConfig cfg;
  std::vector<DatasetRecord> expect_acc;
  std::string expect_rej;
  for (const DatasetRecord& rec : corpus) {
    const Verdict v = filter(rec, cfg);
    if (v.accepted) {
      expect_acc.push_back(rec);
    } else {
      expect_rej += rec.id;
      expect_rej += '\t';
      expect_rej += reason_code(v.reason);
      expect_rej += '\n';
    }
  }
  REQUIRE(!expect_acc.empty());
  REQUIRE(!expect_rej.empty());
  const auto acc_check = temp_path("cli_acc_expect.tsv");
  write_dataset(expect_acc, acc_check.string());
  CHECK(read_bytes(acc) == read_bytes(acc_check));
  CHECK(read_bytes(acc.string() + ".rejects") == expect_rej);

  const auto mapper = temp_path("cli_mapper.txt");
  save_mapper(toy_model(), mapper.string());
  CHECK(run("stats --in " + ds.string() + " --mapper " + mapper.string(),
            "stats") == 0);
  const std::string stats_out = stdout_of("stats");
  CHECK(contains(stats_out, "input=40"));
  CHECK(contains(stats_out, "reject[too_long]="));
  CHECK(contains(stats_out, "mean_compression_ratio="));
}

TEST_CASE("gen-dataset is deterministic and fails loudly") {
  const MapperModel model = toy_model();
  const auto corpus = small_corpus();
  const auto ds = temp_path("gen_ds.tsv");
  write_dataset(corpus, ds.string());
  const auto mapper = temp_path("gen_mapper.txt");
  save_mapper(model, mapper.string());

  const auto out1 = temp_path("gen_out1.tsv");
  const auto out2 = temp_path("gen_out2.tsv");
  const std::string common = " --in " + ds.string() + " --mapper " +
                             mapper.string() + " --workers 4 --batch-size 8";
  CHECK(run("gen-dataset" + common + " --out " + out1.string(), "gen1") == 0);
  CHECK(run("gen-dataset" + common + " --out " + out2.string(), "gen2") == 0);
  CHECK(read_bytes(out1) == read_bytes(out2));
  CHECK(read_bytes(out1.string() + ".rejects") ==
        read_bytes(out2.string() + ".rejects"));
  CHECK(contains(stdout_of("gen1"), "processed=40\n"));
  CHECK(std::filesystem::exists(out1.string() + ".report.txt"));

  JobSpec spec;
  spec.inputs = {ds.string()};
  spec.output = temp_path("gen_out_lib.tsv").string();
  spec.workers = 2;
  spec.batch_size = 8;
  run_job(spec, model);
  CHECK(read_bytes(out1) == read_bytes(spec.output));

  const auto fail_out = temp_path("gen_fail.tsv");
  std::filesystem::remove(fail_out);
  CHECK(run("gen-dataset" + common + " --out " + fail_out.string() +
                " --failure-rate 1.0 --max-retries 1",
            "genfail") == 2);
  CHECK(contains(stderr_of("genfail"), "exceeded retry budget"));
  CHECK(!std::filesystem::exists(fail_out));

  CHECK(run("gen-dataset --in " + temp_path("gen_missing.tsv").string() +
                " --mapper " + mapper.string() + " --out " +
                temp_path("gen_err.tsv").string(),
            "genmissing") == 2);
}

TEST_CASE("config files fill in option values") {
  const auto cfg = temp_path("synth.toml");
  write_text(cfg, "dim=32\nseed=5\n");

  const auto from_cfg = temp_path("cfg_a.bin");
  const auto from_flags = temp_path("cfg_b.bin");
  CHECK(run("synth --config " + cfg.string() + " --text \"hi there\" --out " +
                from_cfg.string(),
            "cfg_a") == 0);
  CHECK(run("synth --dim 32 --seed 5 --text \"hi there\" --out " +
                from_flags.string(),
            "cfg_b") == 0);
  CHECK(read_bytes(from_cfg) == read_bytes(from_flags));
  CHECK(read_bytes(from_cfg.string() + ".meta") ==
        read_bytes(from_flags.string() + ".meta"));

  // Command-line values beat config values.
  const auto override_cfg = temp_path("cfg_c.bin");
  const auto override_flags = temp_path("cfg_d.bin");
  CHECK(run("synth --config " + cfg.string() +
                " --dim 16 --text \"hi there\" --out " + override_cfg.string(),
            "cfg_c") == 0);
  CHECK(run("synth --dim 16 --seed 5 --text \"hi there\" --out " +
                override_flags.string(),
            "cfg_d") == 0);
  CHECK(read_bytes(override_cfg) == read_bytes(override_flags));

  const auto bad = temp_path("synth_bad.toml");
  write_text(bad, "bogus=1\n");
  CHECK(run("synth --config " + bad.string() + " --text hi --out " +
                temp_path("cfg_e.bin").string(),
            "cfg_bad") == 1);
}
