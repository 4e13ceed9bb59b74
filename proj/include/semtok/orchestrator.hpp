#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "semtok/error.hpp"
#include "semtok/pipeline.hpp"

namespace semtok {

struct JobSpec {
  std::vector<std::string> inputs;
  std::string output;
  std::string reject_log;  // defaults to output + ".rejects"
  unsigned workers = 1;
  std::uint64_t batch_size = 64;
  std::uint32_t max_retries = 3;  // extra attempts after the first
  double failure_injection_rate = 0.0;
  std::uint64_t failure_seed = 0;
  FilterConfig filter;
  VocabSpec vocab;

  void validate() const;
  std::string reject_log_path() const {
    return reject_log.empty() ? output + ".rejects" : reject_log;
  }
};

struct JobReport {
  std::uint64_t processed = 0;
  std::uint64_t accepted = 0;
  std::uint64_t rejected = 0;
  std::uint64_t retried = 0;
  std::uint64_t failed = 0;
  std::vector<std::uint64_t> per_worker_batches;  // attempts run per worker
  double wall_seconds = 0.0;

  std::string summary() const;
};

// Raised when a batch exhausts its retries; carries the ids of the affected
// records. No output files are written in that case.
class JobFailedError : public Error {
 public:
  JobFailedError(std::vector<std::string> ids, JobReport report);
  const std::vector<std::string>& ids() const { return ids_; }
  const JobReport& report() const { return report_; }

 private:
  std::vector<std::string> ids_;
  JobReport report_;
};

// Contiguous order-preserving [begin, end) ranges; the last may be short.
std::vector<std::pair<std::size_t, std::size_t>> shard(
    std::size_t count, std::uint64_t batch_size);

// Filters and translates every input record on a pool of `workers` threads.
// Batches land in a reorder buffer and flush in input order, so the output
// and reject log are byte-identical for any worker count. Failure injection
// is a deterministic function of (failure_seed, batch, attempt); a failed
// attempt still delivers the first half of its batch, and id-keyed
// deduplication keeps every record exactly once. Accepted records go to
// spec.output, rejects to the reject log as "id<TAB>reason", both via
// temp-file rename; a plain-text report lands at output + ".report.txt".
JobReport run_job(const JobSpec& spec, const MapperModel& model);

}  // namespace semtok
