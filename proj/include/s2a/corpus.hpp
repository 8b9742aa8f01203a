#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "s2a/rational.hpp"

namespace s2a {

enum class TaskKind { kFactQa, kArgument, kMath };

enum class Category {
  kNone,
  kSuggestCorrect,
  kSuggestIncorrect,
  kRefuteCorrect,
  kLike,
  kWrote,
  kDislike,
  kDidntWrite,
  kDistractorRandom,
  kDistractorInTopic,
};

std::string_view to_string(TaskKind kind);
std::optional<TaskKind> task_kind_from_string(std::string_view name);
std::string_view to_string(Category category);
std::optional<Category> category_from_string(std::string_view name);

/// What was inserted into the clean prompt and where.
struct PerturbationSpec {
  Category category = Category::kNone;
  std::string inserted_text;
  std::size_t insert_offset = 0;  // byte offset into the perturbed prompt
  /// Set when the insertion rule had to fall back (e.g. no '?' in a problem).
  bool degenerate = false;

  friend bool operator==(const PerturbationSpec&, const PerturbationSpec&) = default;
};

struct GoldLabel {
  std::optional<std::string> answer_text;    // FACT_QA
  std::optional<Rational> answer_number;     // MATH
};

struct TaskInstance {
  std::string id;
  TaskKind task_kind = TaskKind::kFactQa;
  std::string clean_prompt;
  std::string perturbed_prompt;
  PerturbationSpec perturbation;
  GoldLabel gold;
};

struct Injection {
  std::string perturbed_prompt;
  PerturbationSpec perturbation;
};

/// Appends the opinion sentence after the question, separated by one space.
/// `category` must be SUGGEST_CORRECT, SUGGEST_INCORRECT or REFUTE_CORRECT.
Injection inject_opinion(std::string_view question, std::string_view suggested_answer, Category category);

/// The unperturbed argument prompt (category NONE).
std::string argument_prompt(std::string_view argument_text);

Injection inject_argument_comment(std::string_view argument_text, Category category);

/// Inserts `distractor` as its own sentence right before the final question
/// sentence (the sentence holding the last '?'), or before the last sentence
/// when there is no '?'.
Injection inject_distractor(std::string_view problem, std::string_view distractor, Category kind);

/// Inverse of every injector: removes `spec.inserted_text` at `spec.insert_offset`.
std::string strip_perturbation(std::string_view perturbed_prompt, const PerturbationSpec& spec);

struct SkippedInstance {
  std::string id;
  std::string reason;
};

struct CorpusLoad {
  std::vector<TaskInstance> instances;  // sorted by id
  std::vector<SkippedInstance> skipped;
};

/// Parses a line-delimited corpus. Records:
///   FACT_QA  {id, question, correct_answer, incorrect_answer?, category?}
///   ARGUMENT {id, argument, category?}
///   MATH     {id, problem, answer_number | correct_answer, distractor?, distractor_kind?}
/// Records without "category" expand into one instance per category of the task.
CorpusLoad parse_corpus(std::istream& in, TaskKind kind);
CorpusLoad load_corpus(const std::filesystem::path& path, TaskKind kind);

/// Keeps the first `n` instances of each category, preserving order.
std::vector<TaskInstance> sample_per_category(const std::vector<TaskInstance>& instances, std::size_t n);

enum class UpstreamFormat { kSycophancyAnswer, kSycophancyFeedback, kGsmIc };
std::optional<UpstreamFormat> upstream_format_from_string(std::string_view name);

/// Maps an upstream release (SycophancyEval answer/feedback JSONL, GSM-IC JSON
/// array) onto the corpus schema above. Returns the number of records written.
std::size_t convert_upstream(std::istream& in, UpstreamFormat format, std::ostream& out);

}  // namespace s2a
