#include <fstream>
#include <string>

#include <json.hpp>

#include "s2a/digest.hpp"
#include "s2a/errors.hpp"
#include "s2a/gateway.hpp"

namespace s2a {

MockBackend::MockBackend(std::string id) : id_(std::move(id)) {}

std::shared_ptr<MockBackend> MockBackend::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read mock script " + path.string());
  auto backend = std::make_shared<MockBackend>();
  std::string line;
  std::size_t index = 0;
  while (std::getline(in, line)) {
    ++index;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Rule rule;
      rule.text = j.at("text").get<std::string>();
      if (j.contains("prompt_sha256")) rule.prompt_sha256 = j["prompt_sha256"].get<std::string>();
      if (j.contains("prompt")) rule.prompt = j["prompt"].get<std::string>();
      if (j.contains("contains")) {
        if (j["contains"].is_string()) {
          rule.contains.push_back(j["contains"].get<std::string>());
        } else {
          rule.contains = j["contains"].get<std::vector<std::string>>();
        }
      }
      if (j.contains("seed")) rule.seed = j["seed"].get<std::int64_t>();
      backend->add_rule(std::move(rule));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(path.string() + ":" + std::to_string(index) + ": bad mock rule: " + e.what());
    }
  }
  return backend;
}

void MockBackend::add_rule(Rule rule) { rules_.push_back(std::move(rule)); }

void MockBackend::script(std::string_view prompt, std::string text) {
  Rule rule;
  rule.prompt_sha256 = sha256_hex(prompt);
  rule.text = std::move(text);
  add_rule(std::move(rule));
}

ChatResponse MockBackend::chat(const ChatRequest& request) {
  calls_.fetch_add(1);
  std::optional<std::string> digest;
  for (const auto& rule : rules_) {
    if (rule.seed && *rule.seed != request.params.seed()) continue;
    if (rule.prompt && *rule.prompt != request.prompt) continue;
    if (rule.prompt_sha256) {
      if (!digest) digest = sha256_hex(request.prompt);
      if (*rule.prompt_sha256 != *digest) continue;
    }
    bool all = true;
    for (const auto& needle : rule.contains) {
      if (request.prompt.find(needle) == std::string_view::npos) {
        all = false;
        break;
      }
    }
    if (!all) continue;
    return ChatResponse{rule.text, std::nullopt};
  }
  const std::string head(request.prompt.substr(0, 120));
  throw FixtureMissing("mock backend has no rule for prompt: " + head);
}

}  // namespace s2a
