#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "s2a/corpus.hpp"
#include "s2a/gateway.hpp"
#include "s2a/prompts.hpp"

namespace s2a {

enum class Strategy {
  kBaseline,
  kOracle,
  kS2aDefault,
  kS2aSingle,
  kS2aKeepOrig,
  kS2aNotInstructed,
  kS2aRelevance,
  kInstructedPrompting,
  kCot,
};

std::string_view to_string(Strategy s);
std::optional<Strategy> strategy_from_string(std::string_view name);

/// True for the strategies that run a regeneration step.
bool is_s2a(Strategy s);

/// Throws ConfigError when `strategy` cannot run on `kind`: the relevance
/// variant is for MATH only, the opinion variants for FACT_QA/ARGUMENT only.
void check_compatible(Strategy strategy, TaskKind kind);

/// Step-1 template for an S2A strategy.
TemplateId step1_template(Strategy strategy);

/// The regenerated context x' parsed out of a step-1 completion.
struct RegeneratedContext {
  std::string context_part;
  std::string question_part;  // empty for S2A_SINGLE
  std::string raw;
  Strategy strategy = Strategy::kS2aDefault;

  /// No label recognised: context_part is the whole trimmed completion.
  bool fallback = false;
  /// A part still contains a parenthesised or bracketed span worth a look.
  bool needs_review = false;

  // What the parser matched, so the split can be audited.
  std::string preamble;        // chatter before the first label, discarded
  std::string context_label;   // exact spelling found in raw
  std::string question_label;
  bool question_first = false;
};

/// Label-based split of a step-1 completion. Never fails.
RegeneratedContext parse_step1(std::string_view raw, Strategy strategy);

struct Step1 {
  RenderedPrompt prompt;
  Completion completion;
  RegeneratedContext regenerated;
};

Step1 regenerate(std::string_view original_prompt, Strategy strategy, const GenerationParams& params,
                 Gateway& gateway);

/// Step-2 prompt built from a regeneration.
RenderedPrompt final_prompt(const RegeneratedContext& regen, std::string_view original_prompt, Strategy strategy,
                            TaskKind task_kind);

/// Full audit record of one pipeline execution.
struct Trace {
  std::optional<RenderedPrompt> step1_prompt;
  std::optional<Completion> step1_completion;
  std::optional<RegeneratedContext> regenerated;
  RenderedPrompt step2_prompt;
  Completion final;
};

/// Step-2 prompt for the strategies that do not regenerate.
RenderedPrompt direct_prompt(const TaskInstance& instance, Strategy strategy);

Trace run_strategy(const TaskInstance& instance, Strategy strategy, const GenerationParams& params,
                   Gateway& gateway);

}  // namespace s2a
