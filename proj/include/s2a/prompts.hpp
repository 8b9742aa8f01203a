#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace s2a {

enum class TemplateId {
  kS2aMain,
  kS2aSingle,
  kFinalUnbiased,
  kS2aKeepOrigFinal,
  kS2aGsmic,
  kGsmicZeroShot,
  kGsmicInstructed,
  kJudgeFact,
  kJudgeQuality,
  kJudgeSentiment,
  kCotSuffix,
};

/// Registry name, e.g. "S2A_MAIN". Also the golden file stem under prompts/.
std::string_view to_string(TemplateId id);
std::optional<TemplateId> template_from_string(std::string_view name);

struct Template {
  TemplateId id;
  std::string_view body;
  std::vector<std::string_view> placeholders;  // names without brackets
  std::string_view source;                     // figure the body is transcribed from
  std::string_view frozen_checksum;            // sha256 of body at review time
};

using Bindings = std::map<std::string, std::string, std::less<>>;

/// A prompt ready to send. `template_id` is empty for prompts sent verbatim
/// (dataset prompts, the not-instructed step-2 assembly).
struct RenderedPrompt {
  std::string text;
  std::optional<TemplateId> template_id;
  Bindings bindings;

  static RenderedPrompt verbatim(std::string text) { return RenderedPrompt{std::move(text), std::nullopt, {}}; }

  friend bool operator==(const RenderedPrompt&, const RenderedPrompt&) = default;
};

/// Immutable table of every prompt template. Safe for concurrent reads.
class Registry {
 public:
  static const Registry& instance();

  std::span<const Template> all() const { return templates_; }
  const Template& get(TemplateId id) const;
  /// Throws UnknownTemplate.
  const Template& get(std::string_view name) const;

  /// Replaces each "[NAME]" with its binding in a single left-to-right pass.
  /// Throws MissingPlaceholder / UnknownPlaceholder when `bindings` does not
  /// cover exactly the template's placeholder set.
  RenderedPrompt render(TemplateId id, const Bindings& bindings) const;

  /// `prompt` + "\n" + suffix body. Used for the chain-of-thought baseline.
  RenderedPrompt append_suffix(const RenderedPrompt& prompt, TemplateId suffix) const;

  std::string checksum(TemplateId id) const;
  /// Throws UnknownTemplate.
  std::string checksum(std::string_view name) const;

 private:
  Registry();
  std::vector<Template> templates_;
};

struct TemplateCheck {
  TemplateId id;
  bool ok = false;
  std::string message;
};

/// Compares `golden` against the registered body and its frozen checksum.
TemplateCheck verify_template(const Template& tmpl, std::string_view golden);

/// Checks every registered template against `<dir>/<NAME>.txt`.
std::vector<TemplateCheck> verify_golden_dir(const std::filesystem::path& dir);

std::filesystem::path default_prompts_dir();

}  // namespace s2a
