#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include "s2a/report.hpp"

namespace s2a {

namespace {

constexpr double kBarWidth = 18.0;
constexpr double kBarGap = 4.0;
constexpr double kGroupGap = 24.0;
constexpr double kPlotHeight = 240.0;
constexpr double kTop = 60.0;
constexpr double kLeft = 60.0;
constexpr double kPanelGap = 60.0;
constexpr double kLegendRow = 18.0;

constexpr const char* kPalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                                    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Scale {
  double lo;
  double hi;
  double y(double v) const { return kTop + kPlotHeight * (hi - v) / (hi - lo); }
};

Scale scale_for(std::string_view metric) {
  if (metric == "accuracy") return {0.0, 1.0};
  return {0.0, 5.0};
}

void axis(std::ostringstream& out, double x0, double width, const Scale& s, std::string_view title) {
  out << "<text x=\"" << num(x0 + width / 2) << "\" y=\"" << num(kTop - 12)
      << "\" text-anchor=\"middle\" font-size=\"13\">" << escape(title) << "</text>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = s.lo + (s.hi - s.lo) * i / 4.0;
    const double y = s.y(v);
    out << "<line x1=\"" << num(x0) << "\" y1=\"" << num(y) << "\" x2=\"" << num(x0 + width) << "\" y2=\""
        << num(y) << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << num(x0 - 6) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\" font-size=\"10\">"
        << num(v) << "</text>\n";
  }
  out << "<line x1=\"" << num(x0) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(x0) << "\" y2=\""
      << num(kTop + kPlotHeight) << "\" stroke=\"#333333\"/>\n";
}

void bar(std::ostringstream& out, double x, const Scale& s, const std::optional<Rational>& value,
         const char* colour) {
  if (!value) {
    out << "<text x=\"" << num(x + kBarWidth / 2) << "\" y=\"" << num(s.y(s.lo) - 4)
        << "\" text-anchor=\"middle\" font-size=\"9\">n/a</text>\n";
    return;
  }
  const double v = std::clamp(value->to_double(), s.lo, s.hi);
  const double y = s.y(v);
  out << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(kBarWidth) << "\" height=\""
      << num(s.y(s.lo) - y) << "\" fill=\"" << colour << "\"/>\n";
  out << "<text x=\"" << num(x + kBarWidth / 2) << "\" y=\"" << num(y - 3)
      << "\" text-anchor=\"middle\" font-size=\"8\">" << value->to_decimal(2) << "</text>\n";
}

}  // namespace

std::string render_svg(const std::vector<MetricsReport>& reports, std::string_view metric,
                       std::string_view config_hash) {
  std::vector<const MetricsReport*> rows;
  for (const auto& r : reports) {
    if (r.metric == metric) rows.push_back(&r);
  }
  std::set<std::string> category_set;
  for (const auto* r : rows) {
    for (const auto& [cat, cell] : r->by_category) category_set.insert(cat);
  }
  const std::vector<std::string> categories(category_set.begin(), category_set.end());
  const std::size_t k = std::max<std::size_t>(rows.size(), 1);
  const double group_width = static_cast<double>(k) * (kBarWidth + kBarGap) - kBarGap;

  const double overall_width = group_width + 2 * kGroupGap;
  const double cat_width =
      static_cast<double>(std::max<std::size_t>(categories.size(), 1)) * (group_width + kGroupGap) + kGroupGap;
  const double right_x = kLeft + overall_width + kPanelGap;
  const double width = right_x + cat_width + 20;
  const double legend_y = kTop + kPlotHeight + 70;
  const double height = legend_y + static_cast<double>(rows.size()) * kLegendRow + 20;
  const Scale s = scale_for(metric);

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
      << "\" viewBox=\"0 0 " << num(width) << " " << num(height) << "\" font-family=\"sans-serif\">\n";
  out << "<desc>config " << escape(config_hash) << "</desc>\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << num(width) << "\" height=\"" << num(height) << "\" fill=\"#ffffff\"/>\n";
  out << "<text x=\"" << num(kLeft) << "\" y=\"24\" font-size=\"15\">" << escape(metric) << "</text>\n";

  axis(out, kLeft, overall_width, s, "overall");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double x = kLeft + kGroupGap + static_cast<double>(i) * (kBarWidth + kBarGap);
    bar(out, x, s, rows[i]->overall, kPalette[i % std::size(kPalette)]);
  }

  axis(out, right_x, cat_width, s, "by category");
  for (std::size_t c = 0; c < categories.size(); ++c) {
    const double gx = right_x + kGroupGap + static_cast<double>(c) * (group_width + kGroupGap);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto it = rows[i]->by_category.find(categories[c]);
      std::optional<Rational> v;
      if (it != rows[i]->by_category.end()) v = it->second.value;
      bar(out, gx + static_cast<double>(i) * (kBarWidth + kBarGap), s, v, kPalette[i % std::size(kPalette)]);
    }
    out << "<text x=\"" << num(gx + group_width / 2) << "\" y=\"" << num(kTop + kPlotHeight + 14)
        << "\" text-anchor=\"end\" font-size=\"9\" transform=\"rotate(-30 " << num(gx + group_width / 2) << " "
        << num(kTop + kPlotHeight + 14) << ")\">" << escape(categories[c]) << "</text>\n";
  }

  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double y = legend_y + static_cast<double>(i) * kLegendRow;
    out << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(y - 10) << "\" width=\"12\" height=\"12\" fill=\""
        << kPalette[i % std::size(kPalette)] << "\"/>\n";
    out << "<text x=\"" << num(kLeft + 18) << "\" y=\"" << num(y) << "\" font-size=\"11\">"
        << escape(rows[i]->strategy) << " (n=" << rows[i]->n << ")</text>\n";
  }
  if (rows.empty()) {
    out << "<text x=\"" << num(kLeft) << "\" y=\"" << num(legend_y) << "\" font-size=\"11\">no data</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace s2a
