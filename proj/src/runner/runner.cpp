#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>
#include <tuple>
#include <variant>

#include "s2a/errors.hpp"
#include "s2a/report.hpp"
#include "s2a/runner.hpp"

namespace s2a {

namespace fs = std::filesystem;
using nlohmann::json;

std::shared_ptr<Backend> make_backend(const BackendSpec& spec) {
  if (spec.kind == "mock") return MockBackend::from_file(spec.script);
  if (spec.kind == "replay") return ReplayBackend::from_file(spec.fixtures, spec.source_id);
  if (spec.kind == "openai") {
    auto config = OpenAIConfig::from_env(spec.env_prefix);
    if (config.api_base.empty() && spec.env_prefix != "S2A_") {
      // Judge falls back to the generation endpoint settings.
      config = OpenAIConfig::from_env("S2A_");
    }
    if (!spec.api_base.empty()) config.api_base = spec.api_base;
    if (config.api_base.empty()) throw ConfigError("set " + spec.env_prefix + "API_BASE for the openai backend");
    return std::make_shared<OpenAIBackend>(std::move(config));
  }
  throw ConfigError("unknown backend kind " + spec.kind);
}

namespace {

struct Job {
  const TaskInstance* instance;
  Strategy strategy;
  std::int64_t seed;
};

struct Failed {
  std::string message;
  bool backend = false;
};
struct Cancelled {};
using Slot = std::variant<std::monostate, RunRecord, Failed, Cancelled>;

using DoneKey = std::tuple<std::string, std::string, std::int64_t>;

DoneKey key_of(const RunRecord& r) { return {r.instance_id, std::string(to_string(r.strategy)), r.seed}; }

}  // namespace

RunOutcome run(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  RunOutcome outcome;

  // Everything that can fail on configuration happens before the first call.
  CorpusLoad corpus = load_corpus(config.corpus_path, config.task_kind);
  std::vector<TaskInstance> instances =
      config.sample_n ? sample_per_category(corpus.instances, *config.sample_n) : corpus.instances;

  auto generation_backend = options.generation_backend ? options.generation_backend : make_backend(config.generation);
  std::shared_ptr<Backend> judge_backend = options.judge_backend;
  if (!judge_backend && config.judge) judge_backend = make_backend(*config.judge);
  if (config.task_kind != TaskKind::kMath && !judge_backend) throw ConfigError("this task needs a judge backend");

  const fs::path out_dir = options.output_dir.value_or(config.output_dir);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir.string() + ": " + ec.message());
  {
    std::ofstream cfg(out_dir / "config.json", std::ios::binary | std::ios::trunc);
    cfg << config.source.dump(2) << '\n';
  }

  RunLogHeader header;
  header.config_hash = config.hash;
  header.task_kind = std::string(to_string(config.task_kind));
  for (Strategy s : config.strategies) header.strategies.emplace_back(to_string(s));
  header.generation_model = config.params.model_id();
  header.judge_model = config.task_kind == TaskKind::kMath ? "" : config.judge_model;
  header.skipped = corpus.skipped;

  outcome.log_path = out_dir / "run_log.jsonl";
  std::set<DoneKey> done;
  if (fs::exists(outcome.log_path)) {
    RunLog existing = read_run_log(outcome.log_path);
    if (existing.header && existing.header->config_hash != config.hash) {
      throw ConfigError(out_dir.string() + " holds a run from a different config (hash " +
                        existing.header->config_hash + ")");
    }
    for (const auto& r : existing.records) done.insert(key_of(r));
    outcome.resumed_records = done.size();
  }
  std::ofstream log(outcome.log_path, std::ios::binary | std::ios::app);
  if (!log) throw IoError("cannot open run log " + outcome.log_path.string());
  if (fs::file_size(outcome.log_path, ec) == 0) log << to_json(header).dump() << '\n' << std::flush;

  std::vector<Job> jobs;
  for (Strategy s : config.strategies) {
    for (const auto& inst : instances) {
      for (std::int64_t seed : config.seeds) {
        if (!done.count({inst.id, std::string(to_string(s)), seed})) jobs.push_back({&inst, s, seed});
      }
    }
  }

  GatewayOptions gen_opts;
  gen_opts.cache_dir = config.cache_dir.value_or(out_dir / "cache") / "generation";
  gen_opts.retry = config.retry;
  gen_opts.max_in_flight = config.max_in_flight;
  Gateway generation(generation_backend, gen_opts);
  std::unique_ptr<Gateway> judge;
  if (judge_backend) {
    GatewayOptions judge_opts = gen_opts;
    judge_opts.cache_dir = config.cache_dir.value_or(out_dir / "cache") / "judge";
    judge = std::make_unique<Gateway>(judge_backend, judge_opts);
  }

  std::vector<Slot> slots(jobs.size());
  std::mutex mu;
  std::condition_variable ready;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      Slot result;
      if (stop.load()) {
        result = Cancelled{};
      } else {
        const Job& job = jobs[i];
        try {
          const GenerationParams params = config.params.with_seed(job.seed);
          const GenerationParams jparams = judge_params(config.judge_model, job.seed, config.params.max_tokens());
          Trace trace = run_strategy(*job.instance, job.strategy, params, generation);
          result = score_record(*job.instance, job.strategy, job.seed, std::move(trace), judge.get(), &jparams);
        } catch (const RetryExhausted& e) {
          result = Failed{e.what(), true};
        } catch (const FixtureMissing& e) {
          result = Failed{e.what(), true};
        } catch (const ProtocolError& e) {
          result = Failed{e.what(), true};
        } catch (const std::exception& e) {
          result = Failed{e.what(), false};
        }
        if (std::holds_alternative<Failed>(result)) stop.store(true);
      }
      {
        std::lock_guard lock(mu);
        slots[i] = std::move(result);
      }
      ready.notify_all();
    }
  };

  std::vector<std::jthread> pool;
  const std::size_t workers = std::min<std::size_t>(config.max_in_flight, std::max<std::size_t>(jobs.size(), 1));
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);

  // Single serializer: commits records in job order as they complete.
  std::optional<Failed> first_failure;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    Slot slot;
    {
      std::unique_lock lock(mu);
      ready.wait(lock, [&] { return !std::holds_alternative<std::monostate>(slots[i]); });
      slot = std::move(slots[i]);
    }
    if (auto* rec = std::get_if<RunRecord>(&slot)) {
      log << to_json(*rec).dump() << '\n' << std::flush;
      ++outcome.new_records;
    } else if (auto* f = std::get_if<Failed>(&slot); f && !first_failure) {
      first_failure = *f;
    }
  }
  pool.clear();
  log.close();

  outcome.generation_calls = generation.backend_calls();
  outcome.judge_calls = judge ? judge->backend_calls() : 0;

  if (first_failure) {
    outcome.exit_code = first_failure->backend ? kExitBackend : kExitFailure;
    outcome.message = "run stopped after " + std::to_string(outcome.new_records) +
                      " new records: " + first_failure->message;
    return outcome;
  }

  const RunLog full = read_run_log(outcome.log_path);
  outcome.total_records = full.records.size();
  outcome.reports = build_reports(full);
  outcome.report_files = write_reports(full, out_dir, ReportFormat::kAll);

  if (config.record_fixtures) {
    const auto gen_calls = collect_calls(full.records, CallSource::kGeneration);
    record_session(gen_calls, out_dir / "generation.fixtures.jsonl");
    if (judge) record_session(collect_calls(full.records, CallSource::kJudge), out_dir / "judge.fixtures.jsonl");
  }

  std::size_t unparsed = 0;
  for (const auto& r : full.records) unparsed += r.has_flag("judge_unparsed") ? 1 : 0;
  if (!full.records.empty()) {
    const double fraction = static_cast<double>(unparsed) / static_cast<double>(full.records.size());
    if (fraction > config.max_flagged_fraction) {
      outcome.exit_code = kExitFlagged;
      outcome.message = std::to_string(unparsed) + " of " + std::to_string(full.records.size()) +
                        " records have unparseable judge output";
      return outcome;
    }
  }
  outcome.message = "ok";
  return outcome;
}

}  // namespace s2a
