#include <fstream>
#include <thread>

#include <json.hpp>

#include "s2a/digest.hpp"
#include "s2a/errors.hpp"
#include "s2a/gateway.hpp"

namespace s2a {

namespace {

std::int64_t now_unix() {
  return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

class InFlightSlot {
 public:
  explicit InFlightSlot(std::counting_semaphore<1024>& sem) : sem_(sem) { sem_.acquire(); }
  ~InFlightSlot() { sem_.release(); }
  InFlightSlot(const InFlightSlot&) = delete;
  InFlightSlot& operator=(const InFlightSlot&) = delete;

 private:
  std::counting_semaphore<1024>& sem_;
};

}  // namespace

Gateway::Gateway(std::shared_ptr<Backend> backend, GatewayOptions options)
    : backend_(std::move(backend)),
      options_(std::move(options)),
      cache_(options_.cache_dir),
      in_flight_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(options_.max_in_flight, 1, 1024))) {
  if (!backend_) throw ConfigError("gateway needs a backend");
  if (options_.retry.attempts < 1) throw ConfigError("retry attempts must be at least 1");
}

Gateway::~Gateway() = default;

Completion Gateway::complete(const RenderedPrompt& prompt, const GenerationParams& params) {
  return complete(std::string_view(prompt.text), params);
}

Completion Gateway::complete(std::string_view prompt, const GenerationParams& params) {
  const std::string backend_id = backend_->id();
  const CacheKey key = CacheKey::compute(backend_id, params, prompt);

  Completion out;
  out.backend_id = backend_id;
  out.key = key.digest;

  if (auto hit = cache_.lookup(key.digest); hit && hit->prompt == prompt) {
    out.text = std::move(hit->text);
    out.cached = true;
  } else {
    InFlightSlot slot(in_flight_);
    backend_calls_.fetch_add(1);
    const auto start = std::chrono::steady_clock::now();
    auto backoff = options_.retry.initial_backoff;
    ChatResponse response;
    for (int attempt = 1;; ++attempt) {
      try {
        response = backend_->chat(ChatRequest{prompt, params, key});
        break;
      } catch (const TransportError& e) {
        if (attempt >= options_.retry.attempts) {
          throw RetryExhausted("backend " + backend_id + " failed after " + std::to_string(attempt) +
                               " attempts: " + e.what());
        }
        std::this_thread::sleep_for(backoff);
        backoff *= 2;
      }
    }
    out.latency =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
    out.text = std::move(response.text);
    out.token_usage = response.token_usage;
    cache_.store(CacheEntry{key.digest, backend_id, params.model_id(), now_unix(), std::string(prompt), out.text});
  }

  {
    std::lock_guard lock(session_mu_);
    session_.push_back(RecordedCall{key.digest, std::string(prompt), out.text});
  }
  return out;
}

std::vector<RecordedCall> Gateway::session() const {
  std::lock_guard lock(session_mu_);
  return session_;
}

void record_session(std::span<const RecordedCall> calls, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write fixture file " + path.string());
  for (const auto& c : calls) {
    nlohmann::json line{{"key", c.key}, {"prompt_b64", base64_encode(c.prompt)},
                        {"completion_b64", base64_encode(c.text)}};
    out << line.dump() << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace s2a
