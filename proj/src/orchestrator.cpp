#include "semtok/orchestrator.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "semtok/util.hpp"

namespace semtok {
namespace {

bool inject_failure(std::uint64_t seed, std::size_t batch,
                    std::uint32_t attempt, double rate) {
  if (rate <= 0.0) return false;
  const std::uint64_t h = mix_seed(mix_seed(seed, batch), attempt);
  const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
  return u < rate;
}

void write_file_atomic(const std::string& path, const std::string& bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("short write to " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

struct Row {
  bool accepted = false;
  std::string payload;  // output line when accepted, record id otherwise
  std::string reason;
};

struct BatchState {
  std::map<std::size_t, Row> rows;  // keyed by index within the batch
  bool terminal = false;
  bool failed = false;
};

}  // namespace

void JobSpec::validate() const {
  if (inputs.empty()) throw Error("job needs at least one input");
  if (output.empty()) throw Error("job output path must not be empty");
  if (workers < 1) throw Error("workers must be >= 1");
  if (batch_size < 1) throw Error("batch_size must be >= 1");
  if (!(failure_injection_rate >= 0.0 && failure_injection_rate <= 1.0))
    throw Error("failure_injection_rate must be in [0, 1]");
  filter.validate();
  vocab.validate();
}

std::string JobReport::summary() const {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "processed=%llu\naccepted=%llu\nrejected=%llu\nretried=%llu\n"
                "failed=%llu\nwall_seconds=%.3f\n",
                static_cast<unsigned long long>(processed),
                static_cast<unsigned long long>(accepted),
                static_cast<unsigned long long>(rejected),
                static_cast<unsigned long long>(retried),
                static_cast<unsigned long long>(failed), wall_seconds);
  std::string out = buf;
  out += "worker_batches=";
  for (std::size_t w = 0; w < per_worker_batches.size(); ++w) {
    if (w > 0) out += ' ';
    out += std::to_string(per_worker_batches[w]);
  }
  out += '\n';
  return out;
}

JobFailedError::JobFailedError(std::vector<std::string> ids, JobReport report)
    : Error("job failed: " + std::to_string(ids.size()) +
            " record(s) exceeded retry budget"),
      ids_(std::move(ids)),
      report_(std::move(report)) {}

std::vector<std::pair<std::size_t, std::size_t>> shard(
    std::size_t count, std::uint64_t batch_size) {
  if (batch_size < 1) throw Error("batch_size must be >= 1");
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t begin = 0; begin < count; begin += batch_size)
    out.emplace_back(begin,
                     std::min(count, begin + static_cast<std::size_t>(
                                                 batch_size)));
  return out;
}

JobReport run_job(const JobSpec& spec, const MapperModel& model) {
  spec.validate();
  const std::vector<DatasetRecord> records = read_dataset(spec.inputs);
  const auto batches = shard(records.size(), spec.batch_size);

  struct Task {
    std::size_t batch;
    std::uint32_t attempt;
  };

  std::mutex mu;
  std::condition_variable cv;
  std::deque<Task> queue;
  std::vector<BatchState> state(batches.size());
  std::size_t outstanding = batches.size();
  std::size_t next_flush = 0;
  std::string out_buf, reject_buf;
  std::vector<std::string> failed_ids;
  std::exception_ptr first_error;

  JobReport report;
  report.per_worker_batches.assign(spec.workers, 0);

  for (std::size_t b = 0; b < batches.size(); ++b) queue.push_back({b, 0});

  // Appends flushable batches to the buffers; call with mu held.
  auto flush_ready = [&] {
    while (next_flush < batches.size() && state[next_flush].terminal) {
      BatchState& st = state[next_flush];
      const auto [begin, end] = batches[next_flush];
      if (st.failed) {
        for (std::size_t i = begin; i < end; ++i)
          failed_ids.push_back(records[i].id);
        report.failed += end - begin;
      } else {
        for (auto& [idx, row] : st.rows) {
          (void)idx;
          if (row.accepted) {
            ++report.accepted;
            out_buf += row.payload;
            out_buf += '\n';
          } else {
            ++report.rejected;
            reject_buf += row.payload;
            reject_buf += '\t';
            reject_buf += row.reason;
            reject_buf += '\n';
          }
        }
      }
      report.processed += end - begin;
      st.rows.clear();
      ++next_flush;
    }
  };

  auto worker = [&](unsigned w) {
    for (;;) {
      Task task{};
      {
        std::unique_lock<std::mutex> lock(mu);
        cv.wait(lock, [&] {
          return !queue.empty() || outstanding == 0 || first_error != nullptr;
        });
        if (first_error != nullptr || outstanding == 0) return;
        task = queue.front();
        queue.pop_front();
      }
      ++report.per_worker_batches[w];

      const auto [begin, end] = batches[task.batch];
      const bool injected =
          inject_failure(spec.failure_seed, task.batch, task.attempt,
                         spec.failure_injection_rate);
      // A simulated crash still delivers the first half, so retries exercise
      // the dedupe path with genuinely repeated ids.
      const std::size_t limit = injected ? begin + (end - begin) / 2 : end;

      std::vector<std::pair<std::size_t, Row>> produced;
      produced.reserve(limit - begin);
      try {
        for (std::size_t i = begin; i < limit; ++i) {
          const BuildOutcome out =
              process_record(records[i], spec.filter, model, spec.vocab);
          Row row;
          row.accepted = out.verdict.accepted;
          if (row.accepted) {
            row.payload = record_to_line(out.record);
          } else {
            row.payload = records[i].id;
            row.reason = reason_code(out.verdict.reason);
          }
          produced.emplace_back(i - begin, std::move(row));
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (first_error == nullptr) first_error = std::current_exception();
        cv.notify_all();
        return;
      }

      {
        std::lock_guard<std::mutex> lock(mu);
        BatchState& st = state[task.batch];
        for (auto& [idx, row] : produced)
          st.rows.emplace(idx, std::move(row));  // first delivery wins
        if (!injected) {
          st.terminal = true;
          --outstanding;
          flush_ready();
        } else if (task.attempt >= spec.max_retries) {
          st.terminal = true;
          st.failed = true;
          --outstanding;
          flush_ready();
        } else {
          ++report.retried;
          queue.push_back({task.batch, task.attempt + 1});
        }
        cv.notify_all();
      }
    }
  };

  const auto start = std::chrono::steady_clock::now();
  std::vector<std::thread> pool;
  pool.reserve(spec.workers);
  for (unsigned w = 0; w < spec.workers; ++w) pool.emplace_back(worker, w);
  for (auto& t : pool) t.join();
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();

  if (first_error != nullptr) std::rethrow_exception(first_error);
  if (!failed_ids.empty()) throw JobFailedError(std::move(failed_ids), report);

  write_file_atomic(spec.output, out_buf);
  write_file_atomic(spec.reject_log_path(), reject_buf);
  write_file_atomic(spec.output + ".report.txt", report.summary());
  return report;
}

}  // namespace semtok
