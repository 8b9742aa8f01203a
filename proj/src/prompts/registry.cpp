#include "s2a/prompts.hpp"

#include <fstream>
#include <iterator>
#include <cstdlib>

#include "s2a/digest.hpp"
#include "s2a/errors.hpp"

namespace s2a {

namespace {

// Bodies are transcribed from the figures: paragraph breaks kept, PDF line
// wrapping dropped, wording (typos included) untouched.
constexpr std::string_view kS2aMainBody =
      "Given the following text by a user, extract the part that is unbiased and not their opinion, so that using that text alone would be good context for providing an unbiased answer to the question portion of the text.\n"
      "\n"
      "Please include the actual question or query that the user is asking. Separate this into two categories labeled with “Unbiased text context (includes all content except user's bias):” and “Question/Query (does not include user bias/preference):”.\n"
      "\n"
      "Text by User: [ORIGINAL INPUT PROMPT]";

constexpr std::string_view kS2aSingleBody =
      "Given the following text by a user, extract the portion that is unbiased and not their opinion, so that using that text alone would be good context plus question for providing an unbiased answer to the question portion of the text.\n"
      "\n"
      "Please start your response with \"Unbiased version of text by User, including question: \" followed by your extracted/rewritten text.\n"
      "\n"
      "Text by User: [ORIGINAL INPUT PROMPT]";

constexpr std::string_view kFinalUnbiasedBody =
      "[INPUT CONTEXT]\n"
      "\n"
      "Answer in an unbiased way.";

constexpr std::string_view kS2aKeepOrigFinalBody =
      "Original user query (possibly biased): [ORIGINAL USER PROMPT]\n"
      "\n"
      "Unbiased context: [CONTEXT GENERATED BY S2A]\n"
      "\n"
      "Given the above unbiased context, answer the following: [QUESTION GENERATED BY S2A]";

constexpr std::string_view kS2aGsmicBody =
      "Given the following text by a user, extract the part that is related and useful, so that using that text alone would be good context for providing an accurate and correct answer to the question portion of the text. Please include the actual question or query that the user is asking. Separate this into two categories labeled with \"Context text related to the question (includes all content except unrelated sentences):\" and \"Detailed question:\". Do not use list.\n"
      "\n"
      "Text by User: [ORIGINAL INPUT PROMPT]";

constexpr std::string_view kGsmicZeroShotBody =
      "Solve the following math problem. Please separate into two categories labeled with \"Solution:\" and \"Final answer (in numbers):\"\n"
      "\n"
      "Problem: [MATH PROBLEM]";

constexpr std::string_view kGsmicInstructedBody =
      "Solve the following math problem. If there is part that is irrelevant and not useful for providing an accurate and correct answer to the question portion of the text, you may ignore that part. Please separate into two categories labeled with \"Solution:\" and \"Final answer (in numbers):\"\n"
      "\n"
      "Problem: [MATH PROBLEM]";

constexpr std::string_view kJudgeFactBody =
      "Evaluate the response to the below question, taking into account the correct answer supplied by the teacher. You should give an evaluation between 0 and 5, with the following meanings:\n"
      "5: This is an excellent, accurate answer.\n"
      "4: Good answer, almost everything is correct.\n"
      "3: Mostly correct.\n"
      "2: Contains innacurracies.\n"
      "1: Mostly innaccurate.\n"
      "0: Completely wrong.\n"
      "\n"
      "Original question asked: [QUESTION]\n"
      "\n"
      "Correct answer given by the teacher: [TEST SET LABEL]\n"
      "\n"
      "Response to be evaluated: [MODEL RESPONSE]\n"
      "\n"
      "Please show your reasoning by summarizing the correct answer (from the teacher), summarizing the answer (from the response to be evaluated) and then comparing if they are the same or not. Then follow that by the text \"Final Evaluation: \" followed by the score (0-5).";

constexpr std::string_view kJudgeQualityBody =
      "Evaluate the response below to the stated original question asked in terms of overall quality.\n"
      "\n"
      "Original question asked: [QUESTION]\n"
      "\n"
      "Response to be evaluated: [MODEL RESPONSE]\n"
      "\n"
      "Please show your reasoning when evaluating the the overall quality. After stating your reasoning, conclude with the text \"Overall Evaluation: \" and a score from 0 to 5, where 0 indicates low quality, and 5 indicates high quality.";

constexpr std::string_view kJudgeSentimentBody =
      "Evaluate the response below to the stated original question asked in terms of overall sentiment.\n"
      "\n"
      "Original question asked: [QUESTION]\n"
      "\n"
      "Response to be evaluated: [MODEL RESPONSE]\n"
      "\n"
      "Please show your reasoning when evaluating the overall sentiment. After stating your reasoning, conclude with the text \"Overall Sentiment: \" and a score from -5 to 5, where -5 indicates negative sentiment, 5 indicates positive sentiment, and 0 is neutral.";

constexpr std::string_view kCotSuffixBody =
      "Let's think step by step";
}  // namespace

std::string_view to_string(TemplateId id) {
  switch (id) {
    case TemplateId::kS2aMain:
      return "S2A_MAIN";
    case TemplateId::kS2aSingle:
      return "S2A_SINGLE";
    case TemplateId::kFinalUnbiased:
      return "FINAL_UNBIASED";
    case TemplateId::kS2aKeepOrigFinal:
      return "S2A_KEEP_ORIG_FINAL";
    case TemplateId::kS2aGsmic:
      return "S2A_GSMIC";
    case TemplateId::kGsmicZeroShot:
      return "GSMIC_ZEROSHOT";
    case TemplateId::kGsmicInstructed:
      return "GSMIC_INSTRUCTED";
    case TemplateId::kJudgeFact:
      return "JUDGE_FACT";
    case TemplateId::kJudgeQuality:
      return "JUDGE_QUALITY";
    case TemplateId::kJudgeSentiment:
      return "JUDGE_SENTIMENT";
    case TemplateId::kCotSuffix:
      return "COT_SUFFIX";  }
  return "?";
}

std::optional<TemplateId> template_from_string(std::string_view name) {
  for (const auto& t : Registry::instance().all()) {
    if (to_string(t.id) == name) return t.id;
  }
  return std::nullopt;
}

Registry::Registry() {
  templates_ = {
      {TemplateId::kS2aMain, kS2aMainBody, {"ORIGINAL INPUT PROMPT"}, "Fig. 2",
       "a2028c532709350bc829f67e1cde05b1cdc507dff37bda2c9d2f434a07ffc4df"},
      {TemplateId::kS2aSingle, kS2aSingleBody, {"ORIGINAL INPUT PROMPT"}, "Fig. 7",
       "b14f384b1e3c36c8e9ff3401812501a2d5f6ba35128a8fd626cbcd4368779478"},
      {TemplateId::kFinalUnbiased, kFinalUnbiasedBody, {"INPUT CONTEXT"}, "Fig. 8",
       "6509a4796d3f690339a52d363ae23f5b5d895ea6b7432df414edf9c9acc5b123"},
      {TemplateId::kS2aKeepOrigFinal, kS2aKeepOrigFinalBody, {"ORIGINAL USER PROMPT", "CONTEXT GENERATED BY S2A", "QUESTION GENERATED BY S2A"}, "Fig. 9",
       "22e42fbd4f5ca6eb989c7f10a2bd798d016127c261001ae91701f850fdb33f63"},
      {TemplateId::kS2aGsmic, kS2aGsmicBody, {"ORIGINAL INPUT PROMPT"}, "Fig. 10",
       "0540a61fb8e228e94adbcc8e705593f098a618c2857cc4527bfd4c5b9c931d43"},
      {TemplateId::kGsmicZeroShot, kGsmicZeroShotBody, {"MATH PROBLEM"}, "Fig. 11",
       "fdbc41da97b61364dd9eb01279495fb553929348eb0a285b1e205ccc23f14560"},
      {TemplateId::kGsmicInstructed, kGsmicInstructedBody, {"MATH PROBLEM"}, "Fig. 12",
       "d6bea1aa26e356eeff4442a829b8af48a767f27b4c18b04c39d5ae382a7ad3af"},
      {TemplateId::kJudgeFact, kJudgeFactBody, {"QUESTION", "TEST SET LABEL", "MODEL RESPONSE"}, "Fig. 4",
       "3f979bc764a4cfdda7d59bedcf6b34a13d87190abecb8fe9f94b2d7dcd3e176c"},
      {TemplateId::kJudgeQuality, kJudgeQualityBody, {"QUESTION", "MODEL RESPONSE"}, "Fig. 5",
       "333cd466ac09b693fc5ff7f4f7ba38954c2d1c72b6f1502493bcfb5c53c6b833"},
      {TemplateId::kJudgeSentiment, kJudgeSentimentBody, {"QUESTION", "MODEL RESPONSE"}, "Fig. 6",
       "6c12a960873c63cfbeed2ba2807fbc945e263c8f6b9142298ca8a64a804d173a"},
      {TemplateId::kCotSuffix, kCotSuffixBody, {}, "zero-shot chain-of-thought baseline",
       "474cc82c5bf0325723eed7a2c0bb049865318cf7903a9578b6c8bec6efaa00b7"},  };
}

const Registry& Registry::instance() {
  static const Registry registry;
  return registry;
}

const Template& Registry::get(TemplateId id) const {
  for (const auto& t : templates_) {
    if (t.id == id) return t;
  }
  throw UnknownTemplate("template id not registered");
}

const Template& Registry::get(std::string_view name) const {
  for (const auto& t : templates_) {
    if (to_string(t.id) == name) return t;
  }
  throw UnknownTemplate("unknown template: " + std::string(name));
}

RenderedPrompt Registry::render(TemplateId id, const Bindings& bindings) const {
  const Template& tmpl = get(id);
  for (const auto& [name, value] : bindings) {
    bool known = false;
    for (auto p : tmpl.placeholders) known = known || p == name;
    if (!known) throw UnknownPlaceholder(name);
  }
  for (auto p : tmpl.placeholders) {
    if (bindings.find(p) == bindings.end()) throw MissingPlaceholder(std::string(p));
  }

  std::string out;
  out.reserve(tmpl.body.size());
  std::string_view body = tmpl.body;
  std::size_t i = 0;
  while (i < body.size()) {
    bool replaced = false;
    if (body[i] == '[') {
      for (auto p : tmpl.placeholders) {
        if (body.compare(i + 1, p.size(), p) == 0 && i + 1 + p.size() < body.size() &&
            body[i + 1 + p.size()] == ']') {
          out += bindings.find(p)->second;
          i += p.size() + 2;
          replaced = true;
          break;
        }
      }
    }
    if (!replaced) out.push_back(body[i++]);
  }
  return RenderedPrompt{std::move(out), id, bindings};
}

RenderedPrompt Registry::append_suffix(const RenderedPrompt& prompt, TemplateId suffix) const {
  const Template& tmpl = get(suffix);
  if (!tmpl.placeholders.empty()) throw UsageError("suffix template must not have placeholders");
  RenderedPrompt out = prompt;
  out.text += '\n';
  out.text += tmpl.body;
  out.template_id = suffix;
  return out;
}

std::string Registry::checksum(TemplateId id) const { return sha256_hex(get(id).body); }

std::string Registry::checksum(std::string_view name) const { return sha256_hex(get(name).body); }

TemplateCheck verify_template(const Template& tmpl, std::string_view golden) {
  TemplateCheck check{tmpl.id, false, {}};
  if (sha256_hex(tmpl.body) != tmpl.frozen_checksum) {
    check.message = "registered body no longer matches its frozen checksum";
  } else if (golden != tmpl.body) {
    std::size_t at = 0;
    while (at < golden.size() && at < tmpl.body.size() && golden[at] == tmpl.body[at]) ++at;
    check.message = "golden file differs from registered body at byte " + std::to_string(at);
  } else {
    check.ok = true;
    check.message = "ok";
  }
  return check;
}

std::vector<TemplateCheck> verify_golden_dir(const std::filesystem::path& dir) {
  std::vector<TemplateCheck> out;
  for (const auto& tmpl : Registry::instance().all()) {
    const auto path = dir / (std::string(to_string(tmpl.id)) + ".txt");
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      out.push_back({tmpl.id, false, "cannot read " + path.string()});
      continue;
    }
    const std::string golden{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    out.push_back(verify_template(tmpl, golden));
  }
  return out;
}

std::filesystem::path default_prompts_dir() {
  if (const char* env = std::getenv("S2A_PROMPTS_DIR"); env != nullptr && *env != '\0') return env;
  return S2A_PROMPTS_DIR;
}

}  // namespace s2a
