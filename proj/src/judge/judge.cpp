#include <algorithm>
#include <cctype>

#include "s2a/errors.hpp"
#include "s2a/judge.hpp"

namespace s2a {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

TemplateId template_for(JudgeKind kind) {
  switch (kind) {
    case JudgeKind::kFact:
      return TemplateId::kJudgeFact;
    case JudgeKind::kQuality:
      return TemplateId::kJudgeQuality;
    case JudgeKind::kSentiment:
      return TemplateId::kJudgeSentiment;
  }
  return TemplateId::kJudgeFact;
}

JudgeVerdict call_judge(JudgeKind kind, Bindings bindings, Gateway& judge, const GenerationParams& params) {
  const RenderedPrompt prompt = Registry::instance().render(template_for(kind), bindings);
  const Completion c = judge.complete(prompt, params);
  JudgeVerdict v = parse_verdict(kind, c.text);
  v.prompt = prompt.text;
  v.key = c.key;
  return v;
}

}  // namespace

std::string_view to_string(JudgeKind kind) {
  switch (kind) {
    case JudgeKind::kFact:
      return "FACT";
    case JudgeKind::kQuality:
      return "QUALITY";
    case JudgeKind::kSentiment:
      return "SENTIMENT";
  }
  return "?";
}

std::optional<JudgeKind> judge_kind_from_string(std::string_view name) {
  for (auto k : {JudgeKind::kFact, JudgeKind::kQuality, JudgeKind::kSentiment}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

std::string_view judge_marker(JudgeKind kind) {
  switch (kind) {
    case JudgeKind::kFact:
      return "Final Evaluation:";
    case JudgeKind::kQuality:
      return "Overall Evaluation:";
    case JudgeKind::kSentiment:
      return "Overall Sentiment:";
  }
  return "";
}

std::optional<Rational> parse_marker_score(std::string_view raw, std::string_view marker, const Rational& lo,
                                           const Rational& hi) {
  const std::string hay = lower(raw);
  const auto at = hay.rfind(lower(marker));
  if (at == std::string::npos) return std::nullopt;
  std::size_t i = at + marker.size();
  while (i < raw.size() && (std::isspace(static_cast<unsigned char>(raw[i])) || raw[i] == '*' || raw[i] == '"' ||
                            raw[i] == '\'')) {
    ++i;
  }
  std::size_t j = i;
  if (j < raw.size() && (raw[j] == '-' || raw[j] == '+')) ++j;
  const std::size_t digits_start = j;
  while (j < raw.size() && std::isdigit(static_cast<unsigned char>(raw[j]))) ++j;
  if (j == digits_start) return std::nullopt;
  if (j + 1 < raw.size() && raw[j] == '.' && std::isdigit(static_cast<unsigned char>(raw[j + 1]))) {
    ++j;
    while (j < raw.size() && std::isdigit(static_cast<unsigned char>(raw[j]))) ++j;
  }
  auto value = Rational::parse(raw.substr(i, j - i));
  if (!value || *value < lo || *value > hi) return std::nullopt;
  return value;
}

JudgeVerdict parse_verdict(JudgeKind kind, std::string_view raw) {
  JudgeVerdict v;
  v.kind = kind;
  v.raw = std::string(raw);
  const Rational lo = kind == JudgeKind::kSentiment ? Rational(-5) : Rational(0);
  v.score = parse_marker_score(raw, judge_marker(kind), lo, Rational(5));
  v.parsed_ok = v.score.has_value();
  return v;
}

GenerationParams judge_params(std::string model_id, std::int64_t seed, int max_tokens) {
  return GenerationParams(std::move(model_id), 0.0, 1.0, seed, max_tokens);
}

JudgeVerdict judge_factuality(std::string_view question, std::string_view gold, std::string_view response,
                              Gateway& judge, const GenerationParams& params) {
  return call_judge(JudgeKind::kFact,
                    {{"QUESTION", std::string(question)},
                     {"TEST SET LABEL", std::string(gold)},
                     {"MODEL RESPONSE", std::string(response)}},
                    judge, params);
}

JudgeVerdict judge_quality(std::string_view question, std::string_view response, Gateway& judge,
                           const GenerationParams& params) {
  return call_judge(JudgeKind::kQuality,
                    {{"QUESTION", std::string(question)}, {"MODEL RESPONSE", std::string(response)}}, judge, params);
}

JudgeVerdict judge_sentiment(std::string_view question, std::string_view response, Gateway& judge,
                             const GenerationParams& params) {
  return call_judge(JudgeKind::kSentiment,
                    {{"QUESTION", std::string(question)}, {"MODEL RESPONSE", std::string(response)}}, judge, params);
}

bool fact_correct(const JudgeVerdict& verdict) {
  return verdict.kind == JudgeKind::kFact && verdict.score && *verdict.score == Rational(5);
}

Rational objectivity(const Rational& sentiment) {
  if (sentiment < Rational(-5) || sentiment > Rational(5)) {
    throw RangeError("sentiment " + sentiment.str() + " outside [-5, 5]");
  }
  return Rational(5) - abs(sentiment);
}

bool match_accuracy(const Rational& predicted, const Rational& gold) { return predicted == gold; }

}  // namespace s2a
