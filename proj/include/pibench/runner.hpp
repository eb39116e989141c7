#pragma once

// Repeat orchestration, the adaptive stopping rule, and the append-only run
// log that makes runs resumable and re-analysable.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pibench/benchmark.hpp"
#include "pibench/clock.hpp"
#include "pibench/providers.hpp"
#include "pibench/stats.hpp"

namespace pibench {

class PlanMismatchError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class CorruptRecordError : public ParseError {
 public:
  using ParseError::ParseError;
};

/// Raised when an observer asks the loop to stop; everything completed so
/// far is already on disk.
class RunInterrupted : public Error {
 public:
  explicit RunInterrupted(std::size_t completed)
      : Error("run interrupted after repeat " + std::to_string(completed)),
        completed_(completed) {}
  std::size_t completed_repeats() const noexcept { return completed_; }

 private:
  std::size_t completed_;
};

struct ExperimentPlan {
  std::shared_ptr<const Benchmark> benchmark;
  ProviderConfig provider;
  SamplingParams params;
  std::size_t min_repeats = 2;
  std::size_t max_repeats = 30;
  double pi_width_threshold = 0.01;
  double confidence = 0.95;
  GradingMode grading = GradingMode::strict;
  std::string run_id;
  std::shared_ptr<Clock> clock = std::make_shared<SystemClock>();

  void validate() const;
};

/// Full plan description as stored in the run-log header. Holds the name of
/// the credentials variable, never its value.
nlohmann::json plan_to_json(const ExperimentPlan& plan);

/// The part of the plan that determines results; resume refuses to continue
/// a run whose stored identity differs.
nlohmann::json plan_identity(const ExperimentPlan& plan);

/// 16 hex digits over plan_identity.
std::string plan_hash(const ExperimentPlan& plan);

struct RunRecord {
  std::string run_id;
  std::size_t repeat_index = 0;  ///< 1-based
  std::string question_id;
  std::optional<std::string> raw_response;  ///< absent when the transport failed
  std::optional<std::string> normalized_answer;
  int score = 0;
  int attempt_count = 1;
  double latency_ms = 0.0;
  std::string timestamp;  ///< UTC ISO-8601
  std::optional<std::string> flag;  ///< unparseable, ambiguous, empty_response, transport_<kind>
  std::map<std::string, std::string> provider_echo;
};

nlohmann::json to_json(const RunRecord& record);
RunRecord record_from_json(const nlohmann::json& obj, std::size_t line);

/// `incomplete` marks a stored run that has not reached a stopping decision
/// yet (interrupted); a finished run always carries one of the other three.
enum class StopReason { threshold_met, max_repeats, degenerate, incomplete };

std::string_view to_string(StopReason reason);
StopReason parse_stop_reason(std::string_view text);

struct RunMetadata {
  std::string run_id;
  std::string plan_hash;
  std::string benchmark_name;
  std::string provider_name;
  std::string provider_kind;
  std::string model_id;
  std::optional<std::string> api_version;
  nlohmann::json params;  ///< only the parameters that were set
  std::map<std::string, std::string> provider_echo;
  std::vector<std::string> warnings;
  std::size_t flagged_records = 0;
  std::string started_utc;   ///< volatile
  std::string finished_utc;  ///< volatile
};

struct RunResult {
  ScoreMatrix matrix;
  RepeatMeans means;
  SummaryStats summary;
  std::optional<PredictionInterval> interval;  ///< absent when fewer than 2 repeats
  StopReason stop_reason = StopReason::max_repeats;
  std::vector<PiPoint> trace;  ///< one point per n = 2..final n
  RunMetadata metadata;
};

/// Summary document. With include_volatile = false, wall-clock timestamps
/// are left out so results from different sessions compare equal.
nlohmann::json to_json(const RunResult& result, bool include_volatile = true);

/// Contents of a run log.
struct StoredRun {
  nlohmann::json plan;
  std::string plan_hash;
  std::vector<RunRecord> records;
  /// Byte length of the intact prefix; a torn final line (interrupted write)
  /// lies beyond it.
  std::uintmax_t intact_bytes = 0;
};

/// Run log plus summary files for many runs under one directory:
///   <dir>/<run_id>.jsonl           plan header line, then one RunRecord per line
///   <dir>/<run_id>.summary.json    RunResult
class RunStore {
 public:
  explicit RunStore(std::filesystem::path dir);

  std::filesystem::path log_path(const std::string& run_id) const;
  std::filesystem::path summary_path(const std::string& run_id) const;
  bool exists(const std::string& run_id) const;

  StoredRun load(const std::string& run_id) const;

  /// Starts a new log; fails if one exists.
  void create(const std::string& run_id, const nlohmann::json& plan, const std::string& hash);
  /// Reopens an existing log for appending, cutting off a torn final line.
  void reopen(const std::string& run_id, std::uintmax_t intact_bytes);
  /// Appends one record and flushes. Safe to call from several threads.
  void append(const RunRecord& record);
  void write_summary(const RunResult& result) const;

  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  std::filesystem::path dir_;
  std::mutex mutex_;
  std::ofstream out_;
};

StoredRun parse_run_log(std::istream& in);

/// Rebuilds the whole RunResult from a run log: the matrix from complete
/// repeats, and the stopping decision by replaying the adaptive rule with
/// the stored plan parameters.
RunResult analyze_run(const StoredRun& run);

class Runner {
 public:
  /// Called after every completed repeat with its 1-based index; returning
  /// false stops the loop with RunInterrupted.
  using RepeatObserver = std::function<bool(std::size_t)>;

  Runner(ExperimentPlan plan, ChatProvider& provider, std::filesystem::path runs_dir);

  /// Asks every question of repeat `repeat_index` (1-based) not already on
  /// record, persists each exchange, and returns the q scores in question order.
  std::vector<std::uint8_t> run_repeat(std::size_t repeat_index);

  /// Fresh run; fails if the run id already has a log.
  RunResult run_adaptive();

  /// Continues a stored run with the same plan identity.
  RunResult resume();

  void set_observer(RepeatObserver observer) { observer_ = std::move(observer); }
  /// Provider calls made by this Runner instance.
  std::size_t requests_made() const noexcept { return requests_.load(); }

 private:
  RunResult loop();
  RunRecord ask(const Question& question, std::size_t repeat_index);

  ExperimentPlan plan_;
  ChatProvider& provider_;
  RunStore store_;
  nlohmann::json plan_json_;
  std::string hash_;
  std::map<std::pair<std::size_t, std::string>, RunRecord> records_;
  std::atomic<std::size_t> requests_{0};
  RepeatObserver observer_;
};

RunResult run_adaptive(const ExperimentPlan& plan, ChatProvider& provider,
                       const std::filesystem::path& runs_dir);
RunResult resume(const std::string& run_id, const ExperimentPlan& plan, ChatProvider& provider,
                 const std::filesystem::path& runs_dir);

}  // namespace pibench
