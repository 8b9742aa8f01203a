#include <charconv>
#include <cmath>

#include "s2a/digest.hpp"
#include "s2a/errors.hpp"
#include "s2a/gateway.hpp"

namespace s2a {

namespace {

std::string shortest(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

void append_field(std::string& out, std::string_view field) {
  out += std::to_string(field.size());
  out += ':';
  out += field;
}

}  // namespace

GenerationParams::GenerationParams(std::string model_id, double temperature, double top_p, std::int64_t seed,
                                   int max_tokens)
    : model_id_(std::move(model_id)),
      temperature_(temperature),
      top_p_(top_p),
      seed_(seed),
      max_tokens_(max_tokens) {
  if (model_id_.empty()) throw ConfigError("model_id must not be empty");
  if (!std::isfinite(temperature_) || temperature_ < 0.0 || temperature_ > 2.0) {
    throw ConfigError("temperature must lie in [0, 2], got " + shortest(temperature_));
  }
  if (!std::isfinite(top_p_) || top_p_ <= 0.0 || top_p_ > 1.0) {
    throw ConfigError("top_p must lie in (0, 1], got " + shortest(top_p_));
  }
  if (max_tokens_ < 1) throw ConfigError("max_tokens must be positive");
}

GenerationParams GenerationParams::with_seed(std::int64_t seed) const {
  GenerationParams p = *this;
  p.seed_ = seed;
  return p;
}

std::string GenerationParams::canonical() const {
  std::string out;
  append_field(out, model_id_);
  append_field(out, shortest(temperature_));
  append_field(out, shortest(top_p_));
  append_field(out, std::to_string(seed_));
  append_field(out, std::to_string(max_tokens_));
  return out;
}

CacheKey CacheKey::compute(std::string_view backend_id, const GenerationParams& params, std::string_view prompt) {
  std::string material = "s2a-cache-v1|";
  append_field(material, backend_id);
  append_field(material, params.canonical());
  append_field(material, prompt);
  return CacheKey{sha256_hex(material)};
}

}  // namespace s2a
