#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "s2a/errors.hpp"
#include "s2a/report.hpp"
#include "s2a/runner.hpp"

namespace s2a {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const fs::path kFixtures = S2A_TEST_FIXTURES;

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("s2a_runner_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

json load_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

ExperimentConfig config_from(const std::string& name, const std::function<void(json&)>& edit = {}) {
  json j = load_json(kFixtures / "acceptance" / (name + ".config.json"));
  if (edit) edit(j);
  return ExperimentConfig::from_json(j, kFixtures / "acceptance");
}

RunOptions into(const fs::path& dir) {
  RunOptions o;
  o.output_dir = dir;
  return o;
}

TEST(Config, ParsesAndResolvesPaths) {
  const auto c = config_from("fact_qa");
  EXPECT_EQ(c.task_kind, TaskKind::kFactQa);
  EXPECT_EQ(c.strategies, (std::vector<Strategy>{Strategy::kBaseline, Strategy::kS2aDefault}));
  EXPECT_EQ(c.seeds, (std::vector<std::int64_t>{1}));
  EXPECT_TRUE(c.corpus_path.is_absolute());
  EXPECT_EQ(c.judge_model, "scripted-judge");
  EXPECT_EQ(c.hash.size(), 64u);
}

TEST(Config, MathDefaultsToThreeSeeds) {
  EXPECT_EQ(config_from("math").seeds, (std::vector<std::int64_t>{1, 2, 3}));
}

TEST(Config, HashIgnoresLocationFields) {
  const auto a = config_from("fact_qa");
  const auto b = config_from("fact_qa", [](json& j) {
    j["output_dir"] = "elsewhere";
    j["cache_dir"] = "cache";
  });
  const auto c = config_from("fact_qa", [](json& j) { j["seeds"] = {2}; });
  EXPECT_EQ(a.hash, b.hash);
  EXPECT_NE(a.hash, c.hash);
}

TEST(Config, RejectsBadConfigs) {
  EXPECT_THROW(config_from("math", [](json& j) { j["strategies"] = {"S2A_DEFAULT"}; }), ConfigError);
  EXPECT_THROW(config_from("fact_qa", [](json& j) { j["strategies"] = {"S2A_RELEVANCE"}; }), ConfigError);
  EXPECT_THROW(config_from("fact_qa", [](json& j) { j["strategies"] = json::array(); }), ConfigError);
  EXPECT_THROW(config_from("fact_qa", [](json& j) { j["strategies"] = {"NOPE"}; }), ConfigError);
  EXPECT_THROW(config_from("fact_qa", [](json& j) { j["seeds"] = json::array(); }), ConfigError);
  EXPECT_THROW(config_from("fact_qa", [](json& j) { j["backends"].erase("judge"); }), ConfigError);
  EXPECT_THROW(config_from("fact_qa", [](json& j) { j["corpus"]["path"] = "missing.jsonl"; }), ConfigError);
  EXPECT_THROW(config_from("fact_qa", [](json& j) { j["corpus"]["task_kind"] = "POEMS"; }), ConfigError);
  EXPECT_THROW(config_from("fact_qa", [](json& j) { j["params"]["temperature"] = 3.0; }), ConfigError);
  EXPECT_THROW(config_from("fact_qa", [](json& j) { j["backends"]["generation"]["kind"] = "carrier-pigeon"; }),
               ConfigError);
  EXPECT_THROW(config_from("fact_qa", [](json& j) { j["backends"]["generation"]["script"] = "none.jsonl"; }),
               ConfigError);
  EXPECT_THROW(config_from("fact_qa", [](json& j) { j["max_in_flight"] = "four"; }), ConfigError);
  EXPECT_THROW(ExperimentConfig::load(kFixtures / "nope.json"), ConfigError);
}

TEST(Run, CountsRecordsAndReports) {
  const auto dir = fresh_dir("count");
  const auto c = config_from("fact_qa", [](json& j) { j["strategies"] = {"BASELINE", "ORACLE", "S2A_DEFAULT"}; });
  const auto out = run(c, into(dir));
  EXPECT_EQ(out.exit_code, kExitOk) << out.message;
  EXPECT_EQ(out.new_records, 12u);
  EXPECT_EQ(out.total_records, 12u);
  EXPECT_EQ(out.reports.size(), 3u);
  EXPECT_TRUE(fs::exists(dir / "report.csv"));
  EXPECT_TRUE(fs::exists(dir / "summary.json"));
  EXPECT_TRUE(fs::exists(dir / "chart_accuracy.svg"));
  EXPECT_TRUE(fs::exists(dir / "config.json"));
}

TEST(Run, RerunMakesNoCallsAndSameReports) {
  const auto dir = fresh_dir("rerun");
  const auto c = config_from("fact_qa");
  const auto first = run(c, into(dir));
  ASSERT_EQ(first.exit_code, kExitOk) << first.message;
  EXPECT_GT(first.generation_calls, 0u);
  const auto csv = slurp(dir / "report.csv");
  const auto second = run(c, into(dir));
  EXPECT_EQ(second.exit_code, kExitOk);
  EXPECT_EQ(second.generation_calls, 0u);
  EXPECT_EQ(second.judge_calls, 0u);
  EXPECT_EQ(second.new_records, 0u);
  EXPECT_EQ(second.resumed_records, 8u);
  EXPECT_EQ(slurp(dir / "report.csv"), csv);
}

TEST(Run, ResumeFillsMissingRecordsFromCache) {
  const auto dir = fresh_dir("resume");
  const auto c = config_from("fact_qa");
  ASSERT_EQ(run(c, into(dir)).exit_code, kExitOk);
  // Drop the last two records; the cache still holds their completions.
  std::vector<std::string> lines;
  {
    std::ifstream in(dir / "run_log.jsonl");
    for (std::string l; std::getline(in, l);) lines.push_back(l);
  }
  lines.resize(lines.size() - 2);
  {
    std::ofstream out(dir / "run_log.jsonl", std::ios::trunc);
    for (const auto& l : lines) out << l << '\n';
  }
  const auto again = run(c, into(dir));
  EXPECT_EQ(again.exit_code, kExitOk);
  EXPECT_EQ(again.new_records, 2u);
  EXPECT_EQ(again.generation_calls, 0u);
  EXPECT_EQ(again.total_records, 8u);
}

TEST(Run, RefusesLogFromAnotherConfig) {
  const auto dir = fresh_dir("mismatch");
  ASSERT_EQ(run(config_from("fact_qa"), into(dir)).exit_code, kExitOk);
  EXPECT_THROW(run(config_from("fact_qa", [](json& j) { j["seeds"] = {5}; }), into(dir)), ConfigError);
}

TEST(Run, MathSeedsAreAveraged) {
  const auto dir = fresh_dir("seeds");
  const auto out = run(config_from("math"), into(dir));
  ASSERT_EQ(out.exit_code, kExitOk) << out.message;
  EXPECT_EQ(out.total_records, 24u);
  for (const auto& r : out.reports) EXPECT_EQ(r.seeds.size(), 3u);
}

TEST(Run, BackendFailureKeepsPartialLog) {
  const auto dir = fresh_dir("partial");
  auto mock = std::make_shared<MockBackend>();
  // Only f1 and f2 have scripted answers, so the run stops partway.
  mock->add_rule({std::nullopt, std::nullopt, {"Dogstar"}, std::nullopt, "Keanu Reeves."});
  mock->add_rule({std::nullopt, std::nullopt, {"Australia"}, std::nullopt, "The capital is Canberra."});
  RunOptions o = into(dir);
  o.generation_backend = mock;
  auto c = config_from("fact_qa", [](json& j) {
    j["strategies"] = {"BASELINE"};
    j["max_in_flight"] = 1;
  });
  const auto out = run(c, o);
  EXPECT_EQ(out.exit_code, kExitBackend);
  EXPECT_EQ(out.new_records, 2u);
  const auto log = read_run_log(dir / "run_log.jsonl");
  EXPECT_EQ(log.records.size(), 2u);
  EXPECT_TRUE(log.header);
}

TEST(Run, UnparsedJudgeOutputAboveThresholdExitsFour) {
  const auto dir = fresh_dir("flagged");
  auto judge = std::make_shared<MockBackend>();
  judge->add_rule({std::nullopt, std::nullopt, {}, std::nullopt, "I cannot decide."});
  RunOptions o = into(dir);
  o.judge_backend = judge;
  const auto out = run(config_from("fact_qa"), o);
  EXPECT_EQ(out.exit_code, kExitFlagged);
  const auto log = read_run_log(dir / "run_log.jsonl");
  for (const auto& r : log.records) {
    EXPECT_TRUE(r.has_flag("judge_unparsed"));
    EXPECT_FALSE(r.derived.correct);
  }
  for (const auto& rep : out.reports) EXPECT_TRUE(rep.empty);
}

TEST(Run, RecordedFixturesReplay) {
  const auto dir = fresh_dir("record");
  auto c = config_from("math", [](json& j) {
    j["record_fixtures"] = true;
    j["seeds"] = {1};
  });
  const auto live = run(c, into(dir));
  ASSERT_EQ(live.exit_code, kExitOk) << live.message;
  ASSERT_TRUE(fs::exists(dir / "generation.fixtures.jsonl"));

  const auto replay_dir = fresh_dir("replay");
  auto rc = config_from("math", [&](json& j) {
    j["seeds"] = {1};
    j["record_fixtures"] = true;
    j["backends"]["generation"] = {{"kind", "replay"},
                                   {"fixtures", (dir / "generation.fixtures.jsonl").string()},
                                   {"source_id", "mock"}};
  });
  const auto replayed = run(rc, into(replay_dir));
  ASSERT_EQ(replayed.exit_code, kExitOk) << replayed.message;
  EXPECT_EQ(replayed.generation_calls, live.generation_calls);
  ASSERT_EQ(replayed.reports.size(), live.reports.size());
  for (std::size_t i = 0; i < live.reports.size(); ++i) {
    EXPECT_EQ(replayed.reports[i].overall, live.reports[i].overall);
    EXPECT_EQ(replayed.reports[i].n, live.reports[i].n);
  }
  EXPECT_EQ(slurp(replay_dir / "generation.fixtures.jsonl"), slurp(dir / "generation.fixtures.jsonl"));
}

TEST(RunLog, RecordJsonRoundTrip) {
  const auto dir = fresh_dir("roundtrip");
  ASSERT_EQ(run(config_from("argument"), into(dir)).exit_code, kExitOk);
  const auto log = read_run_log(dir / "run_log.jsonl");
  ASSERT_FALSE(log.records.empty());
  for (const auto& r : log.records) EXPECT_EQ(to_json(record_from_json(to_json(r))), to_json(r));
  ASSERT_TRUE(log.header);
  EXPECT_EQ(to_json(header_from_json(to_json(*log.header))), to_json(*log.header));
}

TEST(RunLog, TornLastLineIsIgnored) {
  const auto dir = fresh_dir("torn");
  ASSERT_EQ(run(config_from("math", [](json& j) { j["seeds"] = {1}; }), into(dir)).exit_code, kExitOk);
  std::ofstream(dir / "run_log.jsonl", std::ios::app) << R"({"instance_id": "m9", "stra)";
  EXPECT_EQ(read_run_log(dir / "run_log.jsonl").records.size(), 8u);
  EXPECT_THROW(read_run_log(dir / "absent.jsonl"), NotFound);
}

TEST(Report, EmptyLogStillWritesHeaders) {
  const auto dir = fresh_dir("empty_report");
  const auto files = write_reports(RunLog{}, dir, ReportFormat::kAll);
  EXPECT_EQ(files.size(), 3u);
  EXPECT_EQ(slurp(dir / "report.csv"), "config_hash,task_kind,strategy,metric,category,value,exact,n,seeds,flagged,excluded\n");
  EXPECT_NE(slurp(dir / "chart_accuracy.svg").find("<svg"), std::string::npos);
  EXPECT_NO_THROW(json::parse(slurp(dir / "summary.json")));
}

TEST(Report, UnknownFormat) {
  EXPECT_THROW(report_format_from_string("pdf"), UsageError);
  EXPECT_EQ(report_format_from_string("csv"), ReportFormat::kCsv);
}

TEST(Report, TwoStrategiesGiveTwoBarsPerCategory) {
  const auto dir = fresh_dir("bars");
  ASSERT_EQ(run(config_from("fact_qa"), into(dir)).exit_code, kExitOk);
  const auto svg = slurp(dir / "chart_accuracy.svg");
  std::size_t rects = 0;
  for (auto p = svg.find("<rect"); p != std::string::npos; p = svg.find("<rect", p + 1)) ++rects;
  // Background + legend swatches (2) + overall bars (2) + 3 categories x 2 bars.
  EXPECT_EQ(rects, 1u + 2u + 2u + 6u);
}

TEST(Report, CsvRows) {
  const auto dir = fresh_dir("csv");
  const auto out = run(config_from("fact_qa"), into(dir));
  ASSERT_EQ(out.exit_code, kExitOk);
  std::istringstream csv(slurp(dir / "report.csv"));
  std::vector<std::string> rows;
  for (std::string l; std::getline(csv, l);) rows.push_back(l);
  ASSERT_EQ(rows.size(), 1u + 2u * 4u);
  EXPECT_NE(rows[1].find(",BASELINE,accuracy,OVERALL,0.7500,3/4,4,1,"), std::string::npos) << rows[1];
  EXPECT_NE(rows[5].find(",S2A_DEFAULT,accuracy,OVERALL,1.0000,1,4,1,"), std::string::npos) << rows[5];
}

TEST(Trace, SectionsInPipelineOrder) {
  const auto dir = fresh_dir("trace");
  ASSERT_EQ(run(config_from("fact_qa"), into(dir)).exit_code, kExitOk);
  const auto log = read_run_log(dir / "run_log.jsonl");
  const auto text = render_trace(find_record(log, "f1/SUGGEST_CORRECT", Strategy::kS2aDefault, 1));
  std::size_t last = 0;
  for (const char* s : {"=== Step 1 prompt ===", "=== Step 1 completion ===", "=== Regenerated context ===",
                        "=== Step 2 prompt ===", "=== Final response ===", "=== Verdicts ==="}) {
    const auto at = text.find(s);
    ASSERT_NE(at, std::string::npos) << s;
    EXPECT_GT(at, last);
    last = at;
  }
  EXPECT_EQ(text.find("(absent"), std::string::npos);
  const auto base = render_trace(find_record(log, "f1/SUGGEST_CORRECT", Strategy::kBaseline, 1));
  EXPECT_NE(base.find("=== Step 1 prompt ===\n(absent"), std::string::npos);
  EXPECT_NE(base.find("=== Step 1 completion ===\n(absent"), std::string::npos);
  EXPECT_THROW(find_record(log, "bogus", Strategy::kBaseline, 1), NotFound);
}

}  // namespace
}  // namespace s2a
