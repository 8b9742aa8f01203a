#include <fstream>

#include "s2a/digest.hpp"
#include "s2a/errors.hpp"
#include "s2a/runner.hpp"

namespace s2a {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  try {
    return j[key].get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field \"") + key + "\": " + e.what());
  }
}

BackendSpec backend_from_json(const json& j, const fs::path& base, std::string env_prefix) {
  if (!j.is_object()) throw ConfigError("backend descriptor must be an object");
  BackendSpec spec;
  spec.kind = get_or<std::string>(j, "kind", "");
  spec.env_prefix = get_or<std::string>(j, "env_prefix", std::move(env_prefix));
  if (j.contains("script")) spec.script = resolve(base, get_or<std::string>(j, "script", ""));
  if (j.contains("fixtures")) spec.fixtures = resolve(base, get_or<std::string>(j, "fixtures", ""));
  spec.source_id = get_or<std::string>(j, "source_id", "openai");
  spec.api_base = get_or<std::string>(j, "api_base", "");
  if (spec.kind != "mock" && spec.kind != "replay" && spec.kind != "openai") {
    throw ConfigError("backend kind must be mock, replay or openai, got '" + spec.kind + "'");
  }
  return spec;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  c.source = j;

  if (!j.contains("corpus") || !j["corpus"].is_object()) throw ConfigError("config needs a \"corpus\" object");
  const auto& corpus = j["corpus"];
  c.corpus_path = resolve(base_dir, get_or<std::string>(corpus, "path", ""));
  const auto kind_name = get_or<std::string>(corpus, "task_kind", "");
  const auto kind = task_kind_from_string(kind_name);
  if (!kind) throw ConfigError("unknown task_kind '" + kind_name + "'");
  c.task_kind = *kind;

  for (const auto& name : get_or<std::vector<std::string>>(j, "strategies", {})) {
    const auto s = strategy_from_string(name);
    if (!s) throw ConfigError("unknown strategy '" + name + "'");
    c.strategies.push_back(*s);
  }
  if (j.contains("seeds")) {
    c.seeds = get_or<std::vector<std::int64_t>>(j, "seeds", {});
  } else {
    c.seeds = c.task_kind == TaskKind::kMath ? std::vector<std::int64_t>{1, 2, 3} : std::vector<std::int64_t>{1};
  }

  const json params = j.value("params", json::object());
  c.params = GenerationParams(get_or<std::string>(params, "model_id", "llama-2-70b-chat"),
                              get_or<double>(params, "temperature", GenerationParams::kDefaultTemperature),
                              get_or<double>(params, "top_p", GenerationParams::kDefaultTopP),
                              1,
                              get_or<int>(params, "max_tokens", GenerationParams::kDefaultMaxTokens));

  const json backends = j.value("backends", json::object());
  if (!backends.contains("generation")) throw ConfigError("config needs backends.generation");
  c.generation = backend_from_json(backends["generation"], base_dir, "S2A_");
  if (backends.contains("judge")) {
    c.judge = backend_from_json(backends["judge"], base_dir, "S2A_JUDGE_");
    c.judge_model = get_or<std::string>(backends["judge"], "model_id", c.judge_model);
  }

  if (j.contains("sample_n") && !j["sample_n"].is_null()) c.sample_n = get_or<std::size_t>(j, "sample_n", 0);
  c.output_dir = resolve(base_dir, get_or<std::string>(j, "output_dir", "s2a_run"));
  if (j.contains("cache_dir")) c.cache_dir = resolve(base_dir, get_or<std::string>(j, "cache_dir", ""));
  c.max_in_flight = get_or<std::size_t>(j, "max_in_flight", 4);
  c.max_flagged_fraction = get_or<double>(j, "max_flagged_fraction", 0.10);
  if (j.contains("retry")) {
    c.retry.attempts = get_or<int>(j["retry"], "attempts", 3);
    c.retry.initial_backoff = std::chrono::milliseconds(get_or<std::int64_t>(j["retry"], "initial_backoff_ms", 1000));
  }
  c.record_fixtures = get_or<bool>(j, "record_fixtures", false);

  json hashed = j;
  hashed.erase("output_dir");
  hashed.erase("cache_dir");
  c.hash = sha256_hex(hashed.dump());

  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return from_json(j, path.parent_path());
}

void ExperimentConfig::validate() const {
  if (strategies.empty()) throw ConfigError("strategies must not be empty");
  if (seeds.empty()) throw ConfigError("seeds must not be empty");
  for (Strategy s : strategies) check_compatible(s, task_kind);
  if (corpus_path.empty() || !fs::exists(corpus_path)) {
    throw ConfigError("corpus file not found: " + corpus_path.string());
  }
  if (task_kind != TaskKind::kMath && !judge) throw ConfigError("FACT_QA and ARGUMENT runs need backends.judge");
  if (max_in_flight < 1) throw ConfigError("max_in_flight must be at least 1");
  if (max_flagged_fraction < 0.0 || max_flagged_fraction > 1.0) {
    throw ConfigError("max_flagged_fraction must lie in [0, 1]");
  }
  if (retry.attempts < 1) throw ConfigError("retry.attempts must be at least 1");
  auto check_backend = [](const BackendSpec& b, const char* role) {
    if (b.kind == "mock" && !fs::exists(b.script)) {
      throw ConfigError(std::string(role) + " mock script not found: " + b.script.string());
    }
    if (b.kind == "replay" && !fs::exists(b.fixtures)) {
      throw ConfigError(std::string(role) + " fixture file not found: " + b.fixtures.string());
    }
  };
  check_backend(generation, "generation");
  if (judge) check_backend(*judge, "judge");
}

}  // namespace s2a
