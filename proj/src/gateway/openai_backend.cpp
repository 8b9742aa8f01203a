#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include <cstdlib>

#include "s2a/errors.hpp"
#include "s2a/gateway.hpp"

namespace s2a {

using nlohmann::json;

OpenAIConfig OpenAIConfig::from_env(std::string_view prefix) {
  OpenAIConfig config;
  const std::string p(prefix);
  if (const char* v = std::getenv((p + "API_BASE").c_str())) config.api_base = v;
  if (const char* v = std::getenv((p + "API_KEY").c_str())) config.api_key = v;
  return config;
}

OpenAIBackend::OpenAIBackend(OpenAIConfig config) : config_(std::move(config)) {
  const std::string& base = config_.api_base;
  const auto scheme_end = base.find("://");
  if (base.empty() || scheme_end == std::string::npos) {
    throw ConfigError("api base must look like http(s)://host[:port][/path], got '" + base + "'");
  }
  const auto path_start = base.find('/', scheme_end + 3);
  scheme_host_port_ = base.substr(0, path_start);
  path_prefix_ = path_start == std::string::npos ? "" : base.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

std::string OpenAIBackend::request_body(std::string_view prompt, const GenerationParams& params, bool send_seed) {
  json body{{"model", params.model_id()},
            {"messages", json::array({json{{"role", "user"}, {"content", std::string(prompt)}}})},
            {"temperature", params.temperature()},
            {"top_p", params.top_p()},
            {"max_tokens", params.max_tokens()}};
  if (send_seed) body["seed"] = params.seed();
  return body.dump();
}

ChatResponse OpenAIBackend::parse_response(std::string_view body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("response is not JSON: ") + e.what());
  }
  try {
    const auto& message = j.at("choices").at(0).at("message");
    ChatResponse out;
    out.text = message.at("content").get<std::string>();
    if (j.contains("usage") && j["usage"].is_object()) {
      const auto& u = j["usage"];
      out.token_usage = TokenUsage{u.value("prompt_tokens", std::int64_t{0}), u.value("completion_tokens", std::int64_t{0})};
    }
    return out;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed chat-completion payload: ") + e.what());
  }
}

ChatResponse OpenAIBackend::chat(const ChatRequest& request) {
  httplib::Client client(scheme_host_port_);
  const auto secs = static_cast<time_t>(config_.timeout.count());
  client.set_connection_timeout(secs, 0);
  client.set_read_timeout(secs, 0);
  client.set_write_timeout(secs, 0);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  const auto result = client.Post(path_prefix_ + "/chat/completions", headers,
                                  request_body(request.prompt, request.params, config_.send_seed),
                                  "application/json");
  if (!result) throw TransportError("HTTP request failed: " + httplib::to_string(result.error()));
  if (result->status >= 500) throw TransportError("server error " + std::to_string(result->status));
  if (result->status != 200) {
    throw ProtocolError("HTTP " + std::to_string(result->status) + ": " + result->body.substr(0, 300));
  }
  return parse_response(result->body);
}

}  // namespace s2a
