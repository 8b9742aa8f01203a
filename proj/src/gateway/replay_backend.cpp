#include <fstream>

#include <json.hpp>

#include "s2a/digest.hpp"
#include "s2a/errors.hpp"
#include "s2a/gateway.hpp"

namespace s2a {

ReplayBackend::ReplayBackend(std::string source_id) : source_id_(std::move(source_id)) {}

std::shared_ptr<ReplayBackend> ReplayBackend::from_file(const std::filesystem::path& path, std::string source_id) {
  auto backend = std::make_shared<ReplayBackend>(std::move(source_id));
  backend->load(path);
  return backend;
}

void ReplayBackend::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read fixture file " + path.string());
  std::string line;
  std::size_t index = 0;
  while (std::getline(in, line)) {
    ++index;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      add(RecordedCall{j.at("key").get<std::string>(), base64_decode(j.at("prompt_b64").get<std::string>()),
                       base64_decode(j.at("completion_b64").get<std::string>())});
    } catch (const nlohmann::json::exception& e) {
      throw ProtocolError(path.string() + ":" + std::to_string(index) + ": " + e.what());
    }
  }
}

void ReplayBackend::add(RecordedCall call) {
  std::string key = call.key;
  entries_.insert_or_assign(std::move(key), std::move(call));
}

ChatResponse ReplayBackend::chat(const ChatRequest& request) {
  auto it = entries_.find(request.key.digest);
  if (it == entries_.end() || it->second.prompt != request.prompt) {
    throw FixtureMissing("no recorded completion for key " + request.key.digest);
  }
  return ChatResponse{it->second.text, std::nullopt};
}

}  // namespace s2a
