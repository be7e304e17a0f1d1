#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "streamlp/parser.hpp"
#include "streamlp/program.hpp"

namespace streamlp {

/// One corpus directory: encoding.lp, stream.str and an expected result file.
struct CorpusEntry {
    std::string name;
    std::filesystem::path dir;
    std::string encoding;
    std::string stream;
    std::optional<std::string> expected_transcript;
    std::optional<std::string> expected_verdicts;
};

/// Entries in directory-name order.
std::vector<CorpusEntry> load_corpus(const std::filesystem::path& root);

struct JobStreamParams {
    std::int64_t max_jobid = 5;
    std::int64_t max_duration = 3;
    std::int64_t num_machines = 5;
    std::int64_t max_step = 15;
    std::int64_t num_events = 200;
    std::uint64_t seed = 1;
    // jobs per event are drawn uniformly from [min_jobs, max_jobs]; max_jobs <= max_jobid
    std::int64_t min_jobs = 0;
    std::int64_t max_jobs = 2;

    /// Name in the style 5x3x5_15_<n>.
    std::string name(int n) const;
    /// Constant overrides for the job encodings.
    std::map<std::string, std::int64_t> consts() const;
};

/// Deterministic job request stream: one event per step 1..num_events, each
/// with distinct job ids, life span max_step+1, delta 0 and a #forget of the
/// inputs that can no longer be active.
std::string gen_job_stream(const JobStreamParams& p);

struct Job {
    std::int64_t id, machine, duration, arrival;
};

struct ScheduleVerdict {
    bool ok = true;
    std::string message;
};

/// Independent check of a schedule read from jobstart(I,T,S) atoms.
/// With `modulo`, T and S are slots and are unwrapped relative to the
/// arrival of the matching job; otherwise they are absolute time points.
ScheduleVerdict check_schedule(const std::vector<Job>& active_jobs, const std::vector<std::string>& model_atoms,
                               std::int64_t max_step, std::optional<std::int64_t> modulo);

/// Jobs of the events active at `step` (arrival within the last max_step+1 steps).
std::vector<Job> active_jobs(const std::string& stream_text, std::int64_t step, std::int64_t max_step);
std::vector<Job> active_jobs(const std::vector<StreamEvent>& events, std::int64_t step, std::int64_t max_step);

struct BenchRecord {
    std::string stream;
    std::int64_t step = 0;
    bool sat = false;
    std::string variant;
    double seconds = 0;
    std::uint64_t conflicts = 0;
};

struct BenchStream {
    std::string name;
    std::string text;
};

struct BenchConfig {
    Program static_encoding;
    Program cumulative_encoding;
    std::map<std::string, std::int64_t> consts;
    std::int64_t max_step = 15;
    bool reuse_learned = true;
    bool check_schedules = true;
    std::filesystem::path out_dir;  // bench.csv and plot.csv are written here when non-empty
};

struct BenchResult {
    std::vector<BenchRecord> records;
    // per stream, per query: offline active rule counts after the query
    std::map<std::string, std::vector<std::size_t>> static_rules, cumulative_rules;
    std::map<std::string, std::pair<int, int>> counts;  // stream -> (#SAT, #UNSAT)
    int schedules_checked = 0;
};

/// Runs every stream under the static, cumulative and relaunch variants.
/// Throws Error naming stream and step on verdict disagreement or an invalid schedule.
BenchResult run_bench(const std::vector<BenchStream>& streams, const BenchConfig& cfg);

}  // namespace streamlp
