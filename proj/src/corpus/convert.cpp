#include <cstdio>
#include <iostream>
#include <map>
#include <string>

#include <json.hpp>

#include "s2a/corpus.hpp"
#include "s2a/errors.hpp"

namespace s2a {

using nlohmann::json;

namespace {

std::string numbered(const char* prefix, std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s-%05zu", prefix, n);
  return buf;
}

std::vector<json> read_jsonl(std::istream& in) {
  std::vector<json> out;
  std::string line;
  std::size_t index = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++index;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw SchemaError(index, std::string("not valid JSON: ") + e.what());
    }
  }
  return out;
}

std::string trim_copy(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

/// The sentence GSM-IC spliced into the original problem: the middle left
/// over after removing the common prefix and suffix.
std::string inserted_middle(const std::string& original, const std::string& modified) {
  std::size_t p = 0;
  while (p < original.size() && p < modified.size() && original[p] == modified[p]) ++p;
  std::size_t s = 0;
  while (s < original.size() - p && s < modified.size() - p &&
         original[original.size() - 1 - s] == modified[modified.size() - 1 - s]) {
    ++s;
  }
  // Back the prefix up to a word boundary so the sentence comes out whole.
  while (p > 0 && modified[p - 1] != ' ') --p;
  while (s > 0 && modified[modified.size() - s - 1] != ' ') --s;
  return trim_copy(modified.substr(p, modified.size() - s - p));
}

}  // namespace

std::optional<UpstreamFormat> upstream_format_from_string(std::string_view name) {
  if (name == "sycophancy-answer") return UpstreamFormat::kSycophancyAnswer;
  if (name == "sycophancy-feedback") return UpstreamFormat::kSycophancyFeedback;
  if (name == "gsm-ic") return UpstreamFormat::kGsmIc;
  return std::nullopt;
}

std::size_t convert_upstream(std::istream& in, UpstreamFormat format, std::ostream& out) {
  std::size_t written = 0;
  switch (format) {
    case UpstreamFormat::kSycophancyAnswer: {
      // Each question appears once per prompt template upstream; keep the first.
      std::map<std::string, bool> seen;
      std::size_t index = 0;
      for (const auto& rec : read_jsonl(in)) {
        ++index;
        if (!rec.contains("base") || !rec["base"].is_object()) throw SchemaError(index, "missing \"base\" object");
        const auto& base = rec["base"];
        const auto question = base.value("question", std::string{});
        if (question.empty() || seen[question]) continue;
        seen[question] = true;
        json line{{"id", numbered("trivia", ++written)},
                  {"question", question},
                  {"correct_answer", base.value("correct_answer", std::string{})}};
        if (base.contains("incorrect_answer") && base["incorrect_answer"].is_string()) {
          line["incorrect_answer"] = base["incorrect_answer"];
        }
        out << line.dump() << '\n';
      }
      break;
    }
    case UpstreamFormat::kSycophancyFeedback: {
      std::map<std::string, bool> seen;
      std::size_t index = 0;
      for (const auto& rec : read_jsonl(in)) {
        ++index;
        if (!rec.contains("base") || !rec["base"].is_object()) throw SchemaError(index, "missing \"base\" object");
        const auto& base = rec["base"];
        if (base.value("dataset", std::string{}) != "arguments") continue;
        const auto text = base.value("text", std::string{});
        if (text.empty() || seen[text]) continue;
        seen[text] = true;
        out << json{{"id", numbered("argument", ++written)}, {"argument", text}}.dump() << '\n';
      }
      break;
    }
    case UpstreamFormat::kGsmIc: {
      json all;
      try {
        all = json::parse(in);
      } catch (const json::exception& e) {
        throw SchemaError(0, std::string("GSM-IC file is not valid JSON: ") + e.what());
      }
      if (!all.is_array()) throw SchemaError(0, "GSM-IC file must hold a JSON array");
      std::size_t index = 0;
      for (const auto& rec : all) {
        ++index;
        const auto original = rec.value("original_question", std::string{});
        const auto modified = rec.value("new_question", std::string{});
        if (original.empty() || modified.empty() || !rec.contains("answer")) {
          throw SchemaError(index, "GSM-IC record needs original_question, new_question and answer");
        }
        const auto& answer = rec["answer"];
        json line{{"id", numbered("gsmic", ++written)},
                  {"problem", original},
                  {"answer_number", answer.is_string() ? answer.get<std::string>() : answer.dump()}};
        const std::string distractor = inserted_middle(original, modified);
        if (!distractor.empty()) {
          line["distractor"] = distractor;
          line["distractor_kind"] = rec.value("sentence_label", std::string{}) == "in_topic" ? "in_topic" : "random";
        }
        out << line.dump() << '\n';
      }
      break;
    }
  }
  return written;
}

}  // namespace s2a
