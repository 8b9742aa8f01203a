#include <algorithm>
#include <cctype>
#include <regex>

#include "s2a/errors.hpp"
#include "s2a/judge.hpp"

namespace s2a {

namespace {

constexpr std::string_view kFinalAnswerMarker = "final answer (in numbers):";

const std::regex& number_pattern() {
  static const std::regex re(R"(-?\$?-?(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d+)?%?)");
  return re;
}

}  // namespace

std::optional<Rational> normalize_number(std::string_view token) {
  std::string cleaned;
  for (char c : token) {
    if (c == '$' || c == ',' || c == '%' || std::isspace(static_cast<unsigned char>(c))) continue;
    cleaned.push_back(c);
  }
  while (!cleaned.empty() && cleaned.back() == '.') cleaned.pop_back();
  // "$-5" and "-$5" both leave "-5"; a doubled sign is not a number.
  if (cleaned.size() >= 2 && cleaned[0] == '-' && cleaned[1] == '-') return std::nullopt;
  return Rational::parse(cleaned);
}

ExtractedAnswer extract_final_answer(std::string_view response) {
  std::string lowered(response);
  std::transform(lowered.begin(), lowered.end(), lowered.begin(), [](unsigned char c) { return std::tolower(c); });

  const auto& re = number_pattern();
  if (const auto at = lowered.rfind(kFinalAnswerMarker); at != std::string::npos) {
    const std::string tail(response.substr(at + kFinalAnswerMarker.size()));
    std::smatch m;
    if (std::regex_search(tail, m, re)) {
      if (auto v = normalize_number(m.str())) return ExtractedAnswer{*v, false};
    }
  }

  const std::string text(response);
  std::optional<Rational> last;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator(); ++it) {
    if (auto v = normalize_number(it->str())) last = v;
  }
  if (!last) throw NoAnswer("no number in response");
  return ExtractedAnswer{*last, true};
}

}  // namespace s2a
