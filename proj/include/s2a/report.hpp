#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "s2a/judge.hpp"
#include "s2a/runner.hpp"

namespace s2a {

enum class ReportFormat { kCsv, kSummary, kSvg, kAll };

/// Throws UsageError for anything but csv, summary, svg, all.
ReportFormat report_format_from_string(std::string_view name);

/// One report per strategy (header order, else enum order) and metric.
std::vector<MetricsReport> build_reports(const RunLog& log);

/// One row per strategy x metric x category cell, OVERALL first.
std::string render_csv(const std::vector<MetricsReport>& reports, std::string_view config_hash);

std::string render_summary(const RunLog& log, const std::vector<MetricsReport>& reports);

/// Grouped bar chart for one metric: overall panel left, per-category panel right.
std::string render_svg(const std::vector<MetricsReport>& reports, std::string_view metric,
                       std::string_view config_hash);

/// Writes report.csv, summary.json and chart_<metric>.svg into `out_dir`.
std::vector<std::filesystem::path> write_reports(const RunLog& log, const std::filesystem::path& out_dir,
                                                 ReportFormat format);

/// Throws NotFound.
const RunRecord& find_record(const RunLog& log, std::string_view instance_id, Strategy strategy,
                             std::int64_t seed);

/// Pipeline-ordered, human-readable dump of one record.
std::string render_trace(const RunRecord& record);

}  // namespace s2a
