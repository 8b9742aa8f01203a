#include <chrono>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "s2a/corpus.hpp"
#include "s2a/errors.hpp"
#include "s2a/gateway.hpp"
#include "s2a/prompts.hpp"
#include "s2a/report.hpp"
#include "s2a/runner.hpp"

namespace {

namespace fs = std::filesystem;

std::int64_t parse_age_seconds(const std::string& text) {
  if (text.empty()) throw s2a::UsageError("empty --older-than");
  std::size_t used = 0;
  long long n = 0;
  try {
    n = std::stoll(text, &used);
  } catch (const std::exception&) {
    throw s2a::UsageError("bad --older-than '" + text + "' (expected e.g. 90s, 30m, 12h, 7d)");
  }
  const std::string unit = text.substr(used);
  if (n < 0) throw s2a::UsageError("negative --older-than");
  if (unit.empty() || unit == "s") return n;
  if (unit == "m") return n * 60;
  if (unit == "h") return n * 3600;
  if (unit == "d") return n * 86400;
  throw s2a::UsageError("bad --older-than unit '" + unit + "' (expected s, m, h or d)");
}

int cmd_run(const std::string& config_path, const std::string& output_dir) {
  const auto config = s2a::ExperimentConfig::load(config_path);
  s2a::RunOptions options;
  if (!output_dir.empty()) options.output_dir = output_dir;
  const auto outcome = s2a::run(config, options);
  std::cout << "log: " << outcome.log_path.string() << "\n"
            << "records: " << outcome.total_records << " (" << outcome.new_records << " new, "
            << outcome.resumed_records << " resumed)\n"
            << "backend calls: " << outcome.generation_calls << " generation, " << outcome.judge_calls
            << " judge\n";
  for (const auto& f : outcome.report_files) std::cout << "wrote " << f.string() << "\n";
  if (!outcome.message.empty()) std::cerr << outcome.message << "\n";
  return outcome.exit_code;
}

int cmd_report(const std::string& log_path, const std::string& format, const std::string& out_dir) {
  const auto fmt = s2a::report_format_from_string(format);
  const auto log = s2a::read_run_log(log_path);
  const fs::path dir = out_dir.empty() ? fs::path(log_path).parent_path() : fs::path(out_dir);
  for (const auto& f : s2a::write_reports(log, dir.empty() ? fs::path(".") : dir, fmt)) {
    std::cout << "wrote " << f.string() << "\n";
  }
  return s2a::kExitOk;
}

int cmd_trace(const std::string& log_path, const std::string& id, const std::string& strategy, std::int64_t seed) {
  const auto s = s2a::strategy_from_string(strategy);
  if (!s) throw s2a::UsageError("unknown strategy '" + strategy + "'");
  const auto log = s2a::read_run_log(log_path);
  std::cout << s2a::render_trace(s2a::find_record(log, id, *s, seed));
  return s2a::kExitOk;
}

int cmd_convert(const std::string& format, const std::string& input, const std::string& output) {
  const auto fmt = s2a::upstream_format_from_string(format);
  if (!fmt) throw s2a::UsageError("unknown format '" + format + "' (expected sycophancy-answer, sycophancy-feedback or gsm-ic)");
  std::ifstream in(input, std::ios::binary);
  if (!in) throw s2a::IoError("cannot read " + input);
  std::ofstream out(output, std::ios::binary | std::ios::trunc);
  if (!out) throw s2a::IoError("cannot write " + output);
  const auto n = s2a::convert_upstream(in, *fmt, out);
  std::cout << "converted " << n << " records\n";
  return s2a::kExitOk;
}

int cmd_purge(const std::string& dir, const std::string& model, const std::string& older_than, bool all) {
  s2a::PurgeFilter filter;
  if (!model.empty()) filter.model_id = model;
  if (!older_than.empty()) {
    const auto now = std::chrono::duration_cast<std::chrono::seconds>(
                         std::chrono::system_clock::now().time_since_epoch())
                         .count();
    filter.created_before_unix = now - parse_age_seconds(older_than);
  }
  if (!all && !filter.model_id && !filter.created_before_unix) {
    throw s2a::UsageError("cache purge needs --model, --older-than or --all");
  }
  std::cout << "removed " << s2a::purge_cache(dir, filter) << " entries\n";
  return s2a::kExitOk;
}

int cmd_verify(const std::string& dir) {
  const fs::path d = dir.empty() ? s2a::default_prompts_dir() : fs::path(dir);
  bool ok = true;
  for (const auto& check : s2a::verify_golden_dir(d)) {
    std::cout << (check.ok ? "ok   " : "FAIL ") << s2a::to_string(check.id);
    if (!check.ok && !check.message.empty()) std::cout << "  " << check.message;
    std::cout << "\n";
    ok = ok && check.ok;
  }
  return ok ? s2a::kExitOk : s2a::kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-step context regeneration experiments"};
  app.require_subcommand(1);

  std::string config_path, output_dir;
  auto* run = app.add_subcommand("run", "Run an experiment config");
  run->add_option("config", config_path, "Experiment config (JSON)")->required();
  run->add_option("-o,--output", output_dir, "Override the output directory");

  std::string log_path, format = "all", report_dir;
  auto* report = app.add_subcommand("report", "Write reports from a run log");
  report->add_option("log", log_path, "run_log.jsonl")->required();
  report->add_option("-f,--format", format, "csv, summary, svg or all");
  report->add_option("-o,--output", report_dir, "Output directory (default: next to the log)");

  std::string trace_log, trace_id, trace_strategy;
  std::int64_t trace_seed = 1;
  auto* trace = app.add_subcommand("trace", "Print the full trace of one record");
  trace->add_option("log", trace_log, "run_log.jsonl")->required();
  trace->add_option("instance", trace_id, "Instance id")->required();
  trace->add_option("strategy", trace_strategy, "Strategy name")->required();
  trace->add_option("--seed", trace_seed, "Seed");

  auto* corpus = app.add_subcommand("corpus", "Corpus utilities");
  corpus->require_subcommand(1);
  std::string conv_format, conv_in, conv_out;
  auto* convert = corpus->add_subcommand("convert", "Convert an upstream dataset to the corpus format");
  convert->add_option("format", conv_format, "sycophancy-answer, sycophancy-feedback or gsm-ic")->required();
  convert->add_option("input", conv_in)->required();
  convert->add_option("output", conv_out)->required();

  auto* cache = app.add_subcommand("cache", "Cache maintenance");
  cache->require_subcommand(1);
  std::string cache_dir, purge_model, purge_age;
  bool purge_all = false;
  auto* purge = cache->add_subcommand("purge", "Remove cache entries");
  purge->add_option("dir", cache_dir, "Cache directory")->required();
  purge->add_option("--model", purge_model, "Only entries of this model");
  purge->add_option("--older-than", purge_age, "Only entries older than e.g. 7d, 12h");
  purge->add_flag("--all", purge_all, "Remove every entry");

  auto* templates = app.add_subcommand("templates", "Prompt template utilities");
  templates->require_subcommand(1);
  std::string golden_dir;
  auto* verify = templates->add_subcommand("verify", "Check templates against golden files");
  verify->add_option("dir", golden_dir, "Golden directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : s2a::kExitConfig;
  }

  try {
    if (*run) return cmd_run(config_path, output_dir);
    if (*report) return cmd_report(log_path, format, report_dir);
    if (*trace) return cmd_trace(trace_log, trace_id, trace_strategy, trace_seed);
    if (*convert) return cmd_convert(conv_format, conv_in, conv_out);
    if (*purge) return cmd_purge(cache_dir, purge_model, purge_age, purge_all);
    if (*verify) return cmd_verify(golden_dir);
  } catch (const s2a::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return s2a::kExitConfig;
  } catch (const s2a::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return s2a::kExitConfig;
  } catch (const s2a::NotFound& e) {
    std::cerr << "not found: " << e.what() << "\n";
    return s2a::kExitFailure;
  } catch (const s2a::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return s2a::kExitFailure;
  }
  return s2a::kExitFailure;
}
