#include <algorithm>
#include <fstream>
#include <sstream>

#include "s2a/errors.hpp"
#include "s2a/report.hpp"

namespace s2a {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kDecimals = 4;

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
}

std::vector<Strategy> strategy_order(const RunLog& log) {
  std::vector<Strategy> out;
  if (log.header) {
    for (const auto& name : log.header->strategies) {
      if (auto s = strategy_from_string(name); s && std::find(out.begin(), out.end(), *s) == out.end()) {
        out.push_back(*s);
      }
    }
  }
  std::vector<Strategy> extra;
  for (const auto& r : log.records) {
    if (std::find(out.begin(), out.end(), r.strategy) == out.end() &&
        std::find(extra.begin(), extra.end(), r.strategy) == extra.end()) {
      extra.push_back(r.strategy);
    }
  }
  std::sort(extra.begin(), extra.end());
  out.insert(out.end(), extra.begin(), extra.end());
  return out;
}

std::string log_task_kind(const RunLog& log) {
  if (log.header) return log.header->task_kind;
  if (!log.records.empty()) return std::string(to_string(log.records.front().task_kind));
  return "";
}

std::vector<std::string> log_metrics(const RunLog& log) {
  const auto kind = task_kind_from_string(log_task_kind(log));
  return metrics_for(kind.value_or(TaskKind::kFactQa));
}

}  // namespace

ReportFormat report_format_from_string(std::string_view name) {
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "summary") return ReportFormat::kSummary;
  if (name == "svg") return ReportFormat::kSvg;
  if (name == "all") return ReportFormat::kAll;
  throw UsageError("unknown report format '" + std::string(name) + "' (expected csv, summary, svg or all)");
}

std::vector<MetricsReport> build_reports(const RunLog& log) {
  std::vector<RunRecord> sorted = log.records;
  std::sort(sorted.begin(), sorted.end(), [](const RunRecord& a, const RunRecord& b) {
    return std::tie(a.instance_id, a.strategy, a.seed) < std::tie(b.instance_id, b.strategy, b.seed);
  });
  const std::string task = log_task_kind(log);
  std::vector<MetricsReport> out;
  for (Strategy s : strategy_order(log)) {
    std::vector<RunRecord> mine;
    for (const auto& r : sorted) {
      if (r.strategy == s) mine.push_back(r);
    }
    for (const auto& metric : log_metrics(log)) {
      const auto obs = observations(mine, metric);
      out.push_back(aggregate(obs, std::string(to_string(s)), task, metric));
    }
  }
  return out;
}

std::string render_csv(const std::vector<MetricsReport>& reports, std::string_view config_hash) {
  std::ostringstream out;
  out << "config_hash,task_kind,strategy,metric,category,value,exact,n,seeds,flagged,excluded\n";
  for (const auto& r : reports) {
    const std::string prefix = csv_field(config_hash) + "," + csv_field(r.task_kind) + "," + csv_field(r.strategy) +
                               "," + csv_field(r.metric) + ",";
    const std::string tail = "," + std::to_string(r.seeds.size()) + "," + std::to_string(r.flagged) + "," +
                             std::to_string(r.excluded) + "\n";
    if (r.empty || !r.overall) {
      out << prefix << "OVERALL,,,0" << tail;
      continue;
    }
    out << prefix << "OVERALL," << r.overall->to_decimal(kDecimals) << "," << r.overall->str() << "," << r.n << tail;
    for (const auto& [cat, cell] : r.by_category) {
      out << prefix << csv_field(cat) << "," << cell.value.to_decimal(kDecimals) << "," << cell.value.str() << ","
          << cell.n << tail;
    }
  }
  return out.str();
}

std::string render_summary(const RunLog& log, const std::vector<MetricsReport>& reports) {
  json j;
  j["config_hash"] = log.header ? log.header->config_hash : "";
  j["task_kind"] = log_task_kind(log);
  j["generation_model"] = log.header ? log.header->generation_model : "";
  j["judge_model"] = log.header ? log.header->judge_model : "";
  j["records"] = log.records.size();
  json skipped = json::array();
  if (log.header) {
    for (const auto& s : log.header->skipped) skipped.push_back(json{{"id", s.id}, {"reason", s.reason}});
  }
  j["skipped"] = skipped;
  json list = json::array();
  for (const auto& r : reports) {
    json item{{"strategy", r.strategy}, {"metric", r.metric},     {"empty", r.empty},
              {"n", r.n},               {"flagged", r.flagged},   {"excluded", r.excluded}};
    item["overall"] = r.overall ? json(r.overall->to_decimal(kDecimals)) : json(nullptr);
    item["overall_exact"] = r.overall ? json(r.overall->str()) : json(nullptr);
    json seeds = json::array();
    for (const auto& s : r.seeds) {
      seeds.push_back(json{{"seed", s.seed}, {"value", s.value.to_decimal(kDecimals)}, {"exact", s.value.str()}, {"n", s.n}});
    }
    item["seeds"] = seeds;
    json cats = json::object();
    for (const auto& [cat, cell] : r.by_category) {
      cats[cat] = json{{"value", cell.value.to_decimal(kDecimals)}, {"exact", cell.value.str()}, {"n", cell.n}};
    }
    item["by_category"] = cats;
    list.push_back(item);
  }
  j["reports"] = list;
  return j.dump(2) + "\n";
}

std::vector<fs::path> write_reports(const RunLog& log, const fs::path& out_dir, ReportFormat format) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  const auto reports = build_reports(log);
  const std::string hash = log.header ? log.header->config_hash : "";
  std::vector<fs::path> written;
  if (format == ReportFormat::kCsv || format == ReportFormat::kAll) {
    written.push_back(out_dir / "report.csv");
    write_file(written.back(), render_csv(reports, hash));
  }
  if (format == ReportFormat::kSummary || format == ReportFormat::kAll) {
    written.push_back(out_dir / "summary.json");
    write_file(written.back(), render_summary(log, reports));
  }
  if (format == ReportFormat::kSvg || format == ReportFormat::kAll) {
    for (const auto& metric : log_metrics(log)) {
      std::vector<MetricsReport> mine;
      for (const auto& r : reports) {
        if (r.metric == metric) mine.push_back(r);
      }
      written.push_back(out_dir / ("chart_" + metric + ".svg"));
      write_file(written.back(), render_svg(mine, metric, hash));
    }
  }
  return written;
}

const RunRecord& find_record(const RunLog& log, std::string_view instance_id, Strategy strategy, std::int64_t seed) {
  for (const auto& r : log.records) {
    if (r.instance_id == instance_id && r.strategy == strategy && r.seed == seed) return r;
  }
  throw NotFound("no record for instance '" + std::string(instance_id) + "', strategy " +
                 std::string(to_string(strategy)) + ", seed " + std::to_string(seed));
}

std::string render_trace(const RunRecord& r) {
  std::ostringstream out;
  auto section = [&](std::string_view title) { out << "=== " << title << " ===\n"; };
  auto absent = [&] { out << "(absent: " << to_string(r.strategy) << " does not regenerate)\n\n"; };

  out << "instance " << r.instance_id << "  task " << to_string(r.task_kind) << "  category "
      << to_string(r.category) << "  strategy " << to_string(r.strategy) << "  seed " << r.seed << "\n\n";

  section("Step 1 prompt");
  if (r.trace.step1_prompt) {
    out << r.trace.step1_prompt->text << "\n\n";
  } else {
    absent();
  }
  section("Step 1 completion");
  if (r.trace.step1_completion) {
    out << r.trace.step1_completion->text << "\n\n";
  } else {
    absent();
  }
  section("Regenerated context");
  if (r.trace.regenerated) {
    const auto& g = *r.trace.regenerated;
    out << "context: " << g.context_part << "\nquestion: " << g.question_part << "\n";
    if (g.fallback) out << "(parse fallback: no label recognised)\n";
    if (g.needs_review) out << "(needs review: bracketed text left in a part)\n";
    out << "\n";
  } else {
    absent();
  }
  section("Step 2 prompt");
  out << r.trace.step2_prompt.text << "\n\n";
  section("Final response");
  out << r.trace.final.text << "\n\n";
  section("Verdicts");
  if (r.verdicts.empty() && r.derived.extracted) out << "extracted answer: " << r.derived.extracted->str() << "\n";
  for (const auto& v : r.verdicts) {
    out << to_string(v.kind) << ": " << (v.score ? v.score->str() : std::string("unparsed")) << "\n";
  }
  if (r.derived.correct) out << "correct: " << (*r.derived.correct ? "yes" : "no") << "\n";
  if (r.derived.quality) out << "quality: " << r.derived.quality->str() << "\n";
  if (r.derived.objectivity) out << "objectivity: " << r.derived.objectivity->str() << "\n";
  if (r.flagged()) {
    out << "flags:";
    for (const auto& f : r.flags) out << ' ' << f;
    out << "\n";
  }
  return out.str();
}

}  // namespace s2a
