#include <algorithm>
#include <array>
#include <cctype>
#include <span>

#include "s2a/core.hpp"
#include "s2a/errors.hpp"

namespace s2a {

namespace {

enum class Part { kContext, kQuestion };

struct LabelHead {
  std::string_view head;
  Part part;
};

// Longest heads first so "Question/Query (...):" wins over "Question:" at the
// same position. "Query:" covers outputs like "Context: ... Query: ...".
constexpr std::array kDefaultLabels{
    LabelHead{"Unbiased text context", Part::kContext},
    LabelHead{"Question/Query", Part::kQuestion},
    LabelHead{"Question", Part::kQuestion},
    LabelHead{"Context", Part::kContext},
    LabelHead{"Query", Part::kQuestion},
};

constexpr std::array kRelevanceLabels{
    LabelHead{"Context text related to the question", Part::kContext},
    LabelHead{"Detailed question", Part::kQuestion},
    LabelHead{"Question", Part::kQuestion},
    LabelHead{"Context", Part::kContext},
    LabelHead{"Query", Part::kQuestion},
};

constexpr std::array kSingleLabels{
    LabelHead{"Unbiased version of text by User, including question", Part::kContext},
};

std::span<const LabelHead> labels_for(Strategy s) {
  switch (s) {
    case Strategy::kS2aSingle:
      return kSingleLabels;
    case Strategy::kS2aRelevance:
      return kRelevanceLabels;
    default:
      return kDefaultLabels;
  }
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool iequals_at(std::string_view text, std::size_t pos, std::string_view word) {
  if (pos + word.size() > text.size()) return false;
  for (std::size_t k = 0; k < word.size(); ++k) {
    if (std::tolower(static_cast<unsigned char>(text[pos + k])) != std::tolower(static_cast<unsigned char>(word[k]))) {
      return false;
    }
  }
  return true;
}

bool at_boundary(std::string_view text, std::size_t pos) {
  return pos == 0 || !std::isalnum(static_cast<unsigned char>(text[pos - 1]));
}

/// End of the label starting at `pos`: head, optional "(qualifier)", then ':'.
std::optional<std::size_t> match_label(std::string_view text, std::size_t pos, std::string_view head) {
  if (!iequals_at(text, pos, head)) return std::nullopt;
  std::size_t j = pos + head.size();
  auto skip_blanks = [&] {
    while (j < text.size() && (text[j] == ' ' || text[j] == '\t')) ++j;
  };
  skip_blanks();
  if (j < text.size() && text[j] == '(') {
    const auto close = text.find(')', j);
    if (close == std::string_view::npos) return std::nullopt;
    j = close + 1;
    skip_blanks();
  }
  if (j < text.size() && text[j] == ':') return j + 1;
  return std::nullopt;
}

struct Found {
  std::size_t start;
  std::size_t end;
};

std::string trimmed(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return std::string(s);
}

bool has_bracketed_span(std::string_view s) {
  for (auto [open, close] : {std::pair{'(', ')'}, std::pair{'[', ']'}}) {
    const auto o = s.find(open);
    if (o != std::string_view::npos && s.find(close, o + 1) != std::string_view::npos) return true;
  }
  return false;
}

}  // namespace

RegeneratedContext parse_step1(std::string_view raw, Strategy strategy) {
  if (!is_s2a(strategy)) throw ConfigError("parse_step1 needs an S2A strategy");
  RegeneratedContext out;
  out.raw = std::string(raw);
  out.strategy = strategy;

  const auto labels = labels_for(strategy);
  std::optional<Found> context;
  std::optional<Found> question;

  std::size_t i = 0;
  while (i < raw.size() && !(context && question)) {
    std::optional<std::size_t> end;
    Part part = Part::kContext;
    if (at_boundary(raw, i)) {
      for (const auto& label : labels) {
        if ((end = match_label(raw, i, label.head))) {
          part = label.part;
          break;
        }
      }
    }
    if (!end) {
      ++i;
      continue;
    }
    auto& slot = part == Part::kContext ? context : question;
    if (!slot) slot = Found{i, *end};
    i = *end;
  }

  if (!context && !question) {
    out.fallback = true;
    out.context_part = trimmed(raw);
    out.needs_review = has_bracketed_span(out.context_part);
    return out;
  }

  const std::size_t n = raw.size();
  if (context && question) {
    out.question_first = question->start < context->start;
    if (!out.question_first) {
      out.context_part = trimmed(raw.substr(context->end, question->start - context->end));
      out.question_part = trimmed(raw.substr(question->end));
    } else {
      out.question_part = trimmed(raw.substr(question->end, context->start - question->end));
      out.context_part = trimmed(raw.substr(context->end));
    }
  } else if (context) {
    out.context_part = trimmed(raw.substr(context->end));
  } else {
    out.question_first = true;
    out.question_part = trimmed(raw.substr(question->end));
  }
  const std::size_t first = std::min(context ? context->start : n, question ? question->start : n);
  out.preamble = std::string(raw.substr(0, first));
  if (context) out.context_label = std::string(raw.substr(context->start, context->end - context->start));
  if (question) out.question_label = std::string(raw.substr(question->start, question->end - question->start));
  out.needs_review = has_bracketed_span(out.context_part) || has_bracketed_span(out.question_part);
  return out;
}

}  // namespace s2a
