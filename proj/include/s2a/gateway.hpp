#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "s2a/prompts.hpp"

namespace s2a {

/// Decoding parameters. Ranges are checked on construction and every value
/// participates in the cache key.
class GenerationParams {
 public:
  static constexpr double kDefaultTemperature = 0.6;
  static constexpr double kDefaultTopP = 0.9;
  static constexpr int kDefaultMaxTokens = 1024;

  /// Throws ConfigError on temperature outside [0,2], top_p outside (0,1],
  /// max_tokens < 1 or an empty model id.
  explicit GenerationParams(std::string model_id, double temperature = kDefaultTemperature,
                            double top_p = kDefaultTopP, std::int64_t seed = 1,
                            int max_tokens = kDefaultMaxTokens);

  const std::string& model_id() const noexcept { return model_id_; }
  double temperature() const noexcept { return temperature_; }
  double top_p() const noexcept { return top_p_; }
  std::int64_t seed() const noexcept { return seed_; }
  int max_tokens() const noexcept { return max_tokens_; }

  GenerationParams with_seed(std::int64_t seed) const;

  /// Deterministic byte encoding used inside the cache key.
  std::string canonical() const;

  friend bool operator==(const GenerationParams&, const GenerationParams&) = default;

 private:
  std::string model_id_;
  double temperature_;
  double top_p_;
  std::int64_t seed_;
  int max_tokens_;
};

struct TokenUsage {
  std::int64_t prompt = 0;
  std::int64_t completion = 0;
  friend bool operator==(const TokenUsage&, const TokenUsage&) = default;
};

/// One chat completion. `text` is the backend's message content, untouched.
struct Completion {
  std::string text;
  std::string backend_id;
  bool cached = false;
  std::chrono::milliseconds latency{0};
  std::optional<TokenUsage> token_usage;
  std::string key;  // CacheKey digest, hex
};

/// SHA-256 over (backend id, model id, canonical params, prompt bytes), each
/// length-prefixed.
struct CacheKey {
  std::string digest;

  static CacheKey compute(std::string_view backend_id, const GenerationParams& params, std::string_view prompt);
  friend bool operator==(const CacheKey&, const CacheKey&) = default;
};

struct ChatRequest {
  std::string_view prompt;
  const GenerationParams& params;
  const CacheKey& key;
};

struct ChatResponse {
  std::string text;
  std::optional<TokenUsage> token_usage;
};

/// A chat-completion provider. Implementations must be safe to call from
/// several threads at once.
class Backend {
 public:
  virtual ~Backend() = default;
  /// Identity that enters the cache key.
  virtual std::string id() const = 0;
  virtual ChatResponse chat(const ChatRequest& request) = 0;
};

// ---------------------------------------------------------------------------
// Cache

struct CacheEntry {
  std::string key;
  std::string backend_id;
  std::string model_id;
  std::int64_t created_unix = 0;
  std::string prompt;
  std::string text;
};

struct PurgeFilter {
  std::optional<std::string> model_id;
  /// Entries created strictly before this instant match.
  std::optional<std::int64_t> created_before_unix;
  bool matches(const CacheEntry& e) const;
};

/// Content-addressed completion cache. With a directory it stores one JSON
/// file per key (`<dir>/<k0k1>/<key>.json`, written via rename so concurrent
/// workers never observe partial files); without one it is memory-only.
class ResponseCache {
 public:
  explicit ResponseCache(std::optional<std::filesystem::path> dir = std::nullopt);

  std::optional<CacheEntry> lookup(const std::string& key) const;
  void store(const CacheEntry& entry);
  std::size_t size() const;

  const std::optional<std::filesystem::path>& dir() const noexcept { return dir_; }

 private:
  std::filesystem::path path_for(const std::string& key) const;

  std::optional<std::filesystem::path> dir_;
  mutable std::mutex mu_;
  std::unordered_map<std::string, CacheEntry> memory_;
};

/// Removes matching entries from an on-disk cache. Returns the number removed;
/// a missing or empty directory yields 0.
std::size_t purge_cache(const std::filesystem::path& dir, const PurgeFilter& filter);

std::vector<CacheEntry> list_cache(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Gateway

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{1000};
};

struct GatewayOptions {
  std::optional<std::filesystem::path> cache_dir;
  RetryPolicy retry;
  std::size_t max_in_flight = 4;
};

/// One completed call, enough to write a replay fixture.
struct RecordedCall {
  std::string key;
  std::string prompt;
  std::string text;
};

/// Front door for every LLM call: cache lookup, bounded in-flight requests,
/// retries on transport failures.
class Gateway {
 public:
  Gateway(std::shared_ptr<Backend> backend, GatewayOptions options = {});
  ~Gateway();
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  Completion complete(const RenderedPrompt& prompt, const GenerationParams& params);
  Completion complete(std::string_view prompt, const GenerationParams& params);

  /// Requests that reached the backend (cache misses, counting retries once).
  std::uint64_t backend_calls() const noexcept { return backend_calls_.load(); }
  std::string backend_id() const { return backend_->id(); }

  /// Every call completed through this gateway, in completion order.
  std::vector<RecordedCall> session() const;

 private:
  std::shared_ptr<Backend> backend_;
  GatewayOptions options_;
  ResponseCache cache_;
  std::counting_semaphore<1024> in_flight_;
  std::atomic<std::uint64_t> backend_calls_{0};
  mutable std::mutex session_mu_;
  std::vector<RecordedCall> session_;
};

/// Writes a replay fixture: one JSON object per line with fields
/// "key", "prompt_b64", "completion_b64". Throws IoError.
void record_session(std::span<const RecordedCall> calls, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Backends

/// Scripted backend for tests and desk runs. Rules are tried in order; the
/// first one whose conditions all hold answers.
class MockBackend final : public Backend {
 public:
  struct Rule {
    std::optional<std::string> prompt_sha256;
    std::optional<std::string> prompt;
    std::vector<std::string> contains;
    std::optional<std::int64_t> seed;
    std::string text;
  };

  explicit MockBackend(std::string id = "mock");

  /// JSONL with fields text and any of prompt_sha256 / prompt / contains / seed.
  static std::shared_ptr<MockBackend> from_file(const std::filesystem::path& path);

  void add_rule(Rule rule);
  void script(std::string_view prompt, std::string text);

  std::string id() const override { return id_; }
  ChatResponse chat(const ChatRequest& request) override;

  std::uint64_t calls() const noexcept { return calls_.load(); }

 private:
  std::string id_;
  std::vector<Rule> rules_;
  std::atomic<std::uint64_t> calls_{0};
};

/// Serves recorded fixtures by cache-key digest; a miss is FixtureMissing.
class ReplayBackend final : public Backend {
 public:
  /// `source_id` is the id of the backend the fixtures were recorded from, so
  /// replayed requests hash to the same keys.
  explicit ReplayBackend(std::string source_id = "openai");

  static std::shared_ptr<ReplayBackend> from_file(const std::filesystem::path& path,
                                                  std::string source_id = "openai");
  void load(const std::filesystem::path& path);
  void add(RecordedCall call);
  std::size_t size() const { return entries_.size(); }

  std::string id() const override { return source_id_; }
  ChatResponse chat(const ChatRequest& request) override;

 private:
  std::string source_id_;
  std::unordered_map<std::string, RecordedCall> entries_;
};

struct OpenAIConfig {
  std::string api_base;  // e.g. https://api.openai.com/v1
  std::string api_key;
  std::chrono::seconds timeout{120};
  bool send_seed = true;

  /// Reads `<prefix>API_BASE` / `<prefix>API_KEY`, e.g. prefix "S2A_".
  static OpenAIConfig from_env(std::string_view prefix);
};

/// OpenAI-compatible chat-completions over HTTP(S). The prompt is sent as a
/// single user message with no system message.
class OpenAIBackend final : public Backend {
 public:
  explicit OpenAIBackend(OpenAIConfig config);
  std::string id() const override { return "openai"; }
  ChatResponse chat(const ChatRequest& request) override;

  /// Builds the request body; exposed for tests.
  static std::string request_body(std::string_view prompt, const GenerationParams& params, bool send_seed);
  /// Extracts choices[0].message.content; throws ProtocolError.
  static ChatResponse parse_response(std::string_view body);

 private:
  OpenAIConfig config_;
  std::string scheme_host_port_;
  std::string path_prefix_;
};

}  // namespace s2a
