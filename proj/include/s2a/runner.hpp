#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "s2a/core.hpp"
#include "s2a/corpus.hpp"
#include "s2a/gateway.hpp"
#include "s2a/judge.hpp"

namespace s2a {

/// Where completions come from: "mock" (script), "replay" (fixtures) or
/// "openai" (live; base URL and key from the environment unless overridden).
struct BackendSpec {
  std::string kind;
  std::filesystem::path script;
  std::filesystem::path fixtures;
  std::string source_id = "openai";
  std::string api_base;
  std::string env_prefix = "S2A_";
};

struct ExperimentConfig {
  std::filesystem::path corpus_path;
  TaskKind task_kind = TaskKind::kFactQa;
  std::vector<Strategy> strategies;
  std::vector<std::int64_t> seeds;
  GenerationParams params{"llama-2-70b-chat"};
  BackendSpec generation;
  std::optional<BackendSpec> judge;
  std::string judge_model = "gpt-4";
  std::optional<std::size_t> sample_n;
  std::filesystem::path output_dir;
  std::optional<std::filesystem::path> cache_dir;
  std::size_t max_in_flight = 4;
  double max_flagged_fraction = 0.10;
  RetryPolicy retry;
  bool record_fixtures = false;

  /// The parsed file, kept for provenance.
  nlohmann::json source;
  /// SHA-256 of the config with location fields (output_dir, cache_dir) removed.
  std::string hash;

  /// Relative paths resolve against `base_dir`. Throws ConfigError.
  static ExperimentConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
  static ExperimentConfig load(const std::filesystem::path& path);

  /// Checks every invariant that can be checked before a backend call.
  void validate() const;
};

/// Scores and answers derived from the verdicts of one record.
struct Derived {
  std::optional<bool> correct;
  std::optional<Rational> quality;
  std::optional<Rational> sentiment;
  std::optional<Rational> objectivity;
  std::optional<Rational> extracted;
};

struct RunRecord {
  std::string instance_id;
  TaskKind task_kind = TaskKind::kFactQa;
  Category category = Category::kNone;
  Strategy strategy = Strategy::kBaseline;
  std::int64_t seed = 0;
  Trace trace;
  std::vector<JudgeVerdict> verdicts;
  Derived derived;
  /// e.g. "step1_fallback", "judge_unparsed", "extraction_fallback", "no_answer", "needs_review".
  std::vector<std::string> flags;

  bool flagged() const { return !flags.empty(); }
  bool has_flag(std::string_view f) const;
};

nlohmann::json to_json(const RunRecord& record);
RunRecord record_from_json(const nlohmann::json& j);

struct RunLogHeader {
  std::string config_hash;
  std::string task_kind;
  std::vector<std::string> strategies;
  std::string generation_model;
  std::string judge_model;
  std::vector<SkippedInstance> skipped;
};

nlohmann::json to_json(const RunLogHeader& header);
RunLogHeader header_from_json(const nlohmann::json& j);

struct RunLog {
  std::optional<RunLogHeader> header;
  std::vector<RunRecord> records;
};

/// Reads a line-delimited run log. Throws NotFound when the file is absent.
RunLog read_run_log(const std::filesystem::path& path);

/// Scores one record against the judge (or the math extractor).
RunRecord score_record(const TaskInstance& instance, Strategy strategy, std::int64_t seed, Trace trace,
                       Gateway* judge, const GenerationParams* judge_params);

/// Observations of `metric` ("accuracy", "quality", "objectivity").
std::vector<Observation> observations(const std::vector<RunRecord>& records, std::string_view metric);

std::vector<std::string> metrics_for(TaskKind kind);

enum class CallSource { kGeneration, kJudge, kAll };

/// Completions embedded in the records, as replay fixture entries.
std::vector<RecordedCall> collect_calls(const std::vector<RunRecord>& records, CallSource source = CallSource::kAll);

/// Exit codes of `run`.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitBackend = 3,
  kExitFlagged = 4,
};

struct RunOptions {
  /// Replace the configured backends (tests).
  std::shared_ptr<Backend> generation_backend;
  std::shared_ptr<Backend> judge_backend;
  std::optional<std::filesystem::path> output_dir;
};

struct RunOutcome {
  int exit_code = kExitOk;
  std::string message;
  std::filesystem::path log_path;
  std::size_t new_records = 0;
  std::size_t resumed_records = 0;
  std::size_t total_records = 0;
  std::uint64_t generation_calls = 0;
  std::uint64_t judge_calls = 0;
  std::vector<MetricsReport> reports;
  std::vector<std::filesystem::path> report_files;
};

/// Runs strategies x instances x seeds, appending to `<output>/run_log.jsonl`
/// and skipping records already present. Emits reports on success.
/// Throws ConfigError before any backend call when the config is invalid.
RunOutcome run(const ExperimentConfig& config, const RunOptions& options = {});

std::shared_ptr<Backend> make_backend(const BackendSpec& spec);

}  // namespace s2a
