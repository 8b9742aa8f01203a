#include <array>

#include "s2a/core.hpp"
#include "s2a/errors.hpp"

namespace s2a {

namespace {

constexpr std::array<std::pair<Strategy, std::string_view>, 9> kStrategyNames{{
    {Strategy::kBaseline, "BASELINE"},
    {Strategy::kOracle, "ORACLE"},
    {Strategy::kS2aDefault, "S2A_DEFAULT"},
    {Strategy::kS2aSingle, "S2A_SINGLE"},
    {Strategy::kS2aKeepOrig, "S2A_KEEP_ORIG"},
    {Strategy::kS2aNotInstructed, "S2A_NOT_INSTRUCTED"},
    {Strategy::kS2aRelevance, "S2A_RELEVANCE"},
    {Strategy::kInstructedPrompting, "INSTRUCTED_PROMPTING"},
    {Strategy::kCot, "COT"},
}};

std::string join_parts(const std::string& context, const std::string& question) {
  if (question.empty()) return context;
  if (context.empty()) return question;
  return context + "\n" + question;
}

}  // namespace

std::string_view to_string(Strategy s) {
  for (const auto& [k, name] : kStrategyNames) {
    if (k == s) return name;
  }
  return "?";
}

std::optional<Strategy> strategy_from_string(std::string_view name) {
  for (const auto& [k, n] : kStrategyNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

bool is_s2a(Strategy s) {
  switch (s) {
    case Strategy::kS2aDefault:
    case Strategy::kS2aSingle:
    case Strategy::kS2aKeepOrig:
    case Strategy::kS2aNotInstructed:
    case Strategy::kS2aRelevance:
      return true;
    default:
      return false;
  }
}

void check_compatible(Strategy strategy, TaskKind kind) {
  if (!is_s2a(strategy)) return;
  const bool math = kind == TaskKind::kMath;
  if (strategy == Strategy::kS2aRelevance && !math) {
    throw ConfigError("S2A_RELEVANCE only runs on MATH corpora, not " + std::string(to_string(kind)));
  }
  if (strategy != Strategy::kS2aRelevance && math) {
    throw ConfigError(std::string(to_string(strategy)) + " targets opinions; use S2A_RELEVANCE for MATH");
  }
}

TemplateId step1_template(Strategy strategy) {
  switch (strategy) {
    case Strategy::kS2aDefault:
    case Strategy::kS2aKeepOrig:
    case Strategy::kS2aNotInstructed:
      return TemplateId::kS2aMain;
    case Strategy::kS2aSingle:
      return TemplateId::kS2aSingle;
    case Strategy::kS2aRelevance:
      return TemplateId::kS2aGsmic;
    default:
      throw ConfigError(std::string(to_string(strategy)) + " has no regeneration step");
  }
}

Step1 regenerate(std::string_view original_prompt, Strategy strategy, const GenerationParams& params,
                 Gateway& gateway) {
  const auto& registry = Registry::instance();
  Step1 out{registry.render(step1_template(strategy), {{"ORIGINAL INPUT PROMPT", std::string(original_prompt)}}),
            {}, {}};
  out.completion = gateway.complete(out.prompt, params);
  out.regenerated = parse_step1(out.completion.text, strategy);
  return out;
}

RenderedPrompt final_prompt(const RegeneratedContext& regen, std::string_view original_prompt, Strategy strategy,
                            TaskKind task_kind) {
  check_compatible(strategy, task_kind);
  const auto& registry = Registry::instance();
  switch (strategy) {
    case Strategy::kS2aDefault:
    case Strategy::kS2aSingle:
      return registry.render(TemplateId::kFinalUnbiased,
                             {{"INPUT CONTEXT", join_parts(regen.context_part, regen.question_part)}});
    case Strategy::kS2aNotInstructed:
      return RenderedPrompt::verbatim(join_parts(regen.context_part, regen.question_part));
    case Strategy::kS2aKeepOrig:
      return registry.render(TemplateId::kS2aKeepOrigFinal,
                             {{"ORIGINAL USER PROMPT", std::string(original_prompt)},
                              {"CONTEXT GENERATED BY S2A", regen.context_part},
                              {"QUESTION GENERATED BY S2A", regen.question_part}});
    case Strategy::kS2aRelevance:
      return registry.render(TemplateId::kGsmicZeroShot,
                             {{"MATH PROBLEM", join_parts(regen.context_part, regen.question_part)}});
    default:
      throw ConfigError(std::string(to_string(strategy)) + " has no regeneration step");
  }
}

RenderedPrompt direct_prompt(const TaskInstance& instance, Strategy strategy) {
  const auto& registry = Registry::instance();
  const bool math = instance.task_kind == TaskKind::kMath;
  auto as_task_prompt = [&](const std::string& text) {
    return math ? registry.render(TemplateId::kGsmicZeroShot, {{"MATH PROBLEM", text}})
                : RenderedPrompt::verbatim(text);
  };
  switch (strategy) {
    case Strategy::kBaseline:
      return as_task_prompt(instance.perturbed_prompt);
    case Strategy::kOracle:
      return as_task_prompt(instance.clean_prompt);
    case Strategy::kInstructedPrompting:
      return math ? registry.render(TemplateId::kGsmicInstructed, {{"MATH PROBLEM", instance.perturbed_prompt}})
                  : registry.render(TemplateId::kFinalUnbiased, {{"INPUT CONTEXT", instance.perturbed_prompt}});
    case Strategy::kCot:
      return registry.append_suffix(as_task_prompt(instance.perturbed_prompt), TemplateId::kCotSuffix);
    default:
      throw ConfigError(std::string(to_string(strategy)) + " regenerates its context; use run_strategy");
  }
}

Trace run_strategy(const TaskInstance& instance, Strategy strategy, const GenerationParams& params,
                   Gateway& gateway) {
  check_compatible(strategy, instance.task_kind);
  Trace trace;
  if (is_s2a(strategy)) {
    Step1 step1 = regenerate(instance.perturbed_prompt, strategy, params, gateway);
    trace.step2_prompt = final_prompt(step1.regenerated, instance.perturbed_prompt, strategy, instance.task_kind);
    trace.step1_prompt = std::move(step1.prompt);
    trace.step1_completion = std::move(step1.completion);
    trace.regenerated = std::move(step1.regenerated);
  } else {
    trace.step2_prompt = direct_prompt(instance, strategy);
  }
  trace.final = gateway.complete(trace.step2_prompt, params);
  return trace;
}

}  // namespace s2a
