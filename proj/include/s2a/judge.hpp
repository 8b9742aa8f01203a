#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "s2a/gateway.hpp"
#include "s2a/prompts.hpp"
#include "s2a/rational.hpp"

namespace s2a {

enum class JudgeKind { kFact, kQuality, kSentiment };

std::string_view to_string(JudgeKind kind);
std::optional<JudgeKind> judge_kind_from_string(std::string_view name);

/// Marker the judge prompt asks the model to end with, e.g. "Final Evaluation:".
std::string_view judge_marker(JudgeKind kind);

struct JudgeVerdict {
  JudgeKind kind = JudgeKind::kFact;
  std::string prompt;  // rendered judge prompt
  std::string raw;     // judge completion
  std::string key;     // cache key of the judge call
  /// Absent when the output could not be parsed or was out of range.
  std::optional<Rational> score;
  bool parsed_ok = false;
};

/// First number after the last occurrence of `marker` (case-insensitive).
/// Only whitespace, '*' and quote characters may sit between the two. Returns
/// nullopt when missing, malformed or outside [lo, hi].
std::optional<Rational> parse_marker_score(std::string_view raw, std::string_view marker, const Rational& lo,
                                           const Rational& hi);

/// Turns a judge completion into a verdict for `kind`.
JudgeVerdict parse_verdict(JudgeKind kind, std::string_view raw);

/// Judge decoding: temperature 0, top_p 1, same seed and max_tokens as given.
GenerationParams judge_params(std::string model_id, std::int64_t seed = 1, int max_tokens = 1024);

JudgeVerdict judge_factuality(std::string_view question, std::string_view gold, std::string_view response,
                              Gateway& judge, const GenerationParams& params);
JudgeVerdict judge_quality(std::string_view question, std::string_view response, Gateway& judge,
                           const GenerationParams& params);
JudgeVerdict judge_sentiment(std::string_view question, std::string_view response, Gateway& judge,
                             const GenerationParams& params);

/// A factuality verdict counts as correct only at the top score.
bool fact_correct(const JudgeVerdict& verdict);

/// 5 - |S| for a sentiment S in [-5, 5]; throws RangeError otherwise.
Rational objectivity(const Rational& sentiment);

struct ExtractedAnswer {
  Rational value;
  /// No "Final answer (in numbers):" marker; the last number in the text was used.
  bool fallback = false;
};

/// Throws NoAnswer when the response holds no number at all.
ExtractedAnswer extract_final_answer(std::string_view response);

/// Normalises one numeric token: drops "$", ",", "%", trailing '.'.
std::optional<Rational> normalize_number(std::string_view token);

bool match_accuracy(const Rational& predicted, const Rational& gold);

// ---------------------------------------------------------------------------
// Aggregation

/// One scored observation of one metric.
struct Observation {
  std::string instance_id;
  std::string category;
  std::int64_t seed = 0;
  /// Absent when the judge output was unusable; such observations are
  /// excluded from the metric.
  std::optional<Rational> value;
  bool flagged = false;
};

struct Cell {
  Rational value;
  std::size_t n = 0;
};

struct SeedValue {
  std::int64_t seed = 0;
  Rational value;
  std::size_t n = 0;
};

struct MetricsReport {
  std::string strategy;
  std::string task_kind;
  std::string metric;  // "accuracy", "quality", "objectivity"
  /// Sentinel for an empty input.
  bool empty = true;
  std::optional<Rational> overall;
  std::size_t n = 0;
  std::map<std::string, Cell> by_category;  // ordered by category name
  std::vector<SeedValue> seeds;             // ordered by seed
  std::size_t flagged = 0;
  std::size_t excluded = 0;
};

/// Per seed: mean over instances per category and overall. Then each cell is
/// the arithmetic mean of its per-seed values. Never throws on empty input.
MetricsReport aggregate(std::span<const Observation> observations, std::string strategy, std::string task_kind,
                        std::string metric);

}  // namespace s2a
