#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "s2a/digest.hpp"
#include "s2a/errors.hpp"
#include "s2a/gateway.hpp"

namespace s2a {
namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("s2a_gateway_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

GatewayOptions fast_options(std::optional<fs::path> cache_dir = std::nullopt) {
  GatewayOptions o;
  o.cache_dir = std::move(cache_dir);
  o.retry.initial_backoff = std::chrono::milliseconds(1);
  return o;
}

class FlakyBackend : public Backend {
 public:
  explicit FlakyBackend(int failures) : failures_(failures) {}
  std::string id() const override { return "flaky"; }
  ChatResponse chat(const ChatRequest& r) override {
    ++calls;
    if (failures_-- > 0) throw TransportError("down");
    return {"ok:" + std::string(r.prompt), std::nullopt};
  }
  std::atomic<int> calls{0};

 private:
  std::atomic<int> failures_;
};

class ConcurrencyProbe : public Backend {
 public:
  std::string id() const override { return "probe"; }
  ChatResponse chat(const ChatRequest& r) override {
    const int now = ++active;
    int seen = peak.load();
    while (now > seen && !peak.compare_exchange_weak(seen, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
    --active;
    return {std::string(r.prompt), std::nullopt};
  }
  std::atomic<int> active{0};
  std::atomic<int> peak{0};
};

TEST(GenerationParams, Validation) {
  EXPECT_THROW(GenerationParams(""), ConfigError);
  EXPECT_THROW(GenerationParams("m", -0.1), ConfigError);
  EXPECT_THROW(GenerationParams("m", 2.1), ConfigError);
  EXPECT_THROW(GenerationParams("m", 0.6, 0.0), ConfigError);
  EXPECT_THROW(GenerationParams("m", 0.6, 1.1), ConfigError);
  EXPECT_THROW(GenerationParams("m", 0.6, 0.9, 1, 0), ConfigError);
  const GenerationParams p("m");
  EXPECT_EQ(p.temperature(), 0.6);
  EXPECT_EQ(p.top_p(), 0.9);
  EXPECT_EQ(p.max_tokens(), 1024);
  EXPECT_EQ(p.with_seed(7).seed(), 7);
}

TEST(CacheKey, EveryFieldMatters) {
  const GenerationParams p("m");
  const auto base = CacheKey::compute("b", p, "prompt");
  EXPECT_EQ(base, CacheKey::compute("b", p, "prompt"));
  EXPECT_EQ(base.digest.size(), 64u);
  EXPECT_NE(base, CacheKey::compute("c", p, "prompt"));
  EXPECT_NE(base, CacheKey::compute("b", p, "prompt "));
  EXPECT_NE(base, CacheKey::compute("b", p.with_seed(2), "prompt"));
  EXPECT_NE(base, CacheKey::compute("b", GenerationParams("n"), "prompt"));
  EXPECT_NE(base, CacheKey::compute("b", GenerationParams("m", 0.7), "prompt"));
  EXPECT_NE(base, CacheKey::compute("b", GenerationParams("m", 0.6, 0.8), "prompt"));
  EXPECT_NE(base, CacheKey::compute("b", GenerationParams("m", 0.6, 0.9, 1, 10), "prompt"));
  // Length prefixes keep field boundaries apart.
  EXPECT_NE(CacheKey::compute("ab", p, "c"), CacheKey::compute("a", p, "bc"));
}

TEST(Gateway, MockByDigestThenCached) {
  auto mock = std::make_shared<MockBackend>();
  const std::string prompt = "What is the capital of France?";
  mock->add_rule({sha256_hex(prompt), std::nullopt, {}, std::nullopt, "The answer is Paris."});
  Gateway gw(mock, fast_options());
  const GenerationParams p("m");
  const auto first = gw.complete(prompt, p);
  EXPECT_EQ(first.text, "The answer is Paris.");
  EXPECT_FALSE(first.cached);
  EXPECT_EQ(gw.backend_calls(), 1u);
  const auto second = gw.complete(prompt, p);
  EXPECT_TRUE(second.cached);
  EXPECT_EQ(second.text, first.text);
  EXPECT_EQ(gw.backend_calls(), 1u);
  EXPECT_EQ(mock->calls(), 1u);
}

TEST(Gateway, MockRulesInOrderWithSeedAndContains) {
  auto mock = std::make_shared<MockBackend>();
  mock->add_rule({std::nullopt, std::nullopt, {"alpha", "beta"}, 2, "seed two"});
  mock->add_rule({std::nullopt, std::nullopt, {"alpha"}, std::nullopt, "any alpha"});
  mock->script("exact", "exact hit");
  Gateway gw(mock, fast_options());
  const GenerationParams p("m");
  EXPECT_EQ(gw.complete("alpha beta", p.with_seed(2)).text, "seed two");
  EXPECT_EQ(gw.complete("alpha beta", p.with_seed(3)).text, "any alpha");
  EXPECT_EQ(gw.complete("exact", p).text, "exact hit");
  EXPECT_THROW(gw.complete("nothing matches", p), FixtureMissing);
}

TEST(Gateway, MockFromFile) {
  const auto dir = fresh_dir("mockfile");
  std::ofstream(dir / "script.jsonl") << R"({"contains": "capital", "text": "Paris"})" << "\n\n"
                                      << R"({"prompt": "hi", "text": "hello"})" << "\n";
  auto mock = MockBackend::from_file(dir / "script.jsonl");
  Gateway gw(mock, fast_options());
  EXPECT_EQ(gw.complete("the capital?", GenerationParams("m")).text, "Paris");
  EXPECT_EQ(gw.complete("hi", GenerationParams("m")).text, "hello");
  std::ofstream(dir / "bad.jsonl") << "{not json\n";
  EXPECT_THROW(MockBackend::from_file(dir / "bad.jsonl"), ConfigError);
  EXPECT_THROW(MockBackend::from_file(dir / "missing.jsonl"), IoError);
}

TEST(Gateway, EmptyReplayIsFixtureMissing) {
  Gateway gw(std::make_shared<ReplayBackend>(), fast_options());
  EXPECT_THROW(gw.complete("anything", GenerationParams("m")), FixtureMissing);
}

TEST(Gateway, RecordReplayRoundTrip) {
  const auto dir = fresh_dir("replay");
  auto mock = std::make_shared<MockBackend>("openai");
  mock->script("p1", "line one\nwith \"quotes\"");
  mock->script("p2", "");
  mock->script("p3", "unicode \xc3\xa9 and \t tabs");
  Gateway live(mock, fast_options());
  const GenerationParams p("m");
  std::vector<std::string> texts;
  for (const char* q : {"p1", "p2", "p3"}) texts.push_back(live.complete(q, p).text);
  const auto session = live.session();
  ASSERT_EQ(session.size(), 3u);
  record_session(session, dir / "fixtures.jsonl");

  Gateway replay(ReplayBackend::from_file(dir / "fixtures.jsonl"), fast_options());
  int i = 0;
  for (const char* q : {"p1", "p2", "p3"}) EXPECT_EQ(replay.complete(q, p).text, texts[i++]);
  EXPECT_THROW(replay.complete("p4", p), FixtureMissing);
  EXPECT_THROW(replay.complete("p1", p.with_seed(9)), FixtureMissing);
}

TEST(Gateway, EmptySessionRecordsEmptyFixture) {
  const auto dir = fresh_dir("empty_session");
  record_session({}, dir / "f.jsonl");
  EXPECT_EQ(fs::file_size(dir / "f.jsonl"), 0u);
  auto replay = ReplayBackend::from_file(dir / "f.jsonl");
  EXPECT_EQ(replay->size(), 0u);
}

TEST(Gateway, RecordSessionUnwritablePath) {
  EXPECT_THROW(record_session({}, "/nonexistent/dir/f.jsonl"), IoError);
}

TEST(Gateway, ReplayRejectsMismatchedPrompt) {
  ReplayBackend replay;
  const GenerationParams p("m");
  const auto key = CacheKey::compute("openai", p, "real prompt");
  replay.add({key.digest, "other prompt", "text"});
  EXPECT_THROW(replay.chat(ChatRequest{"real prompt", p, key}), FixtureMissing);
}

TEST(Gateway, RetriesTransportErrors) {
  auto flaky = std::make_shared<FlakyBackend>(2);
  Gateway gw(flaky, fast_options());
  EXPECT_EQ(gw.complete("x", GenerationParams("m")).text, "ok:x");
  EXPECT_EQ(flaky->calls.load(), 3);
  EXPECT_EQ(gw.backend_calls(), 1u);
}

TEST(Gateway, GivesUpAfterBoundedAttempts) {
  auto flaky = std::make_shared<FlakyBackend>(100);
  Gateway gw(flaky, fast_options());
  EXPECT_THROW(gw.complete("x", GenerationParams("m")), RetryExhausted);
  EXPECT_EQ(flaky->calls.load(), 3);
}

TEST(Gateway, BoundsInFlightRequests) {
  auto probe = std::make_shared<ConcurrencyProbe>();
  auto opts = fast_options();
  opts.max_in_flight = 2;
  Gateway gw(probe, opts);
  std::vector<std::jthread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&gw, t] {
      for (int i = 0; i < 4; ++i) gw.complete("p" + std::to_string(t * 10 + i), GenerationParams("m"));
    });
  }
  threads.clear();
  EXPECT_LE(probe->peak.load(), 2);
  EXPECT_EQ(gw.backend_calls(), 32u);
}

TEST(Cache, PersistsAcrossGateways) {
  const auto dir = fresh_dir("persist");
  auto mock = std::make_shared<MockBackend>();
  mock->script("q", "a");
  const GenerationParams p("m");
  {
    Gateway gw(mock, fast_options(dir));
    gw.complete("q", p);
  }
  Gateway again(mock, fast_options(dir));
  const auto c = again.complete("q", p);
  EXPECT_TRUE(c.cached);
  EXPECT_EQ(c.text, "a");
  EXPECT_EQ(again.backend_calls(), 0u);
  EXPECT_EQ(list_cache(dir).size(), 1u);
}

TEST(Cache, PurgeByModelAndAge) {
  const auto dir = fresh_dir("purge");
  {
    ResponseCache cache(dir);
    for (int i = 0; i < 5; ++i) {
      const std::string model = i < 2 ? "old-model" : "new-model";
      cache.store(CacheEntry{sha256_hex(std::to_string(i)), "mock", model, 1000 + i, "p", "t"});
    }
  }
  EXPECT_EQ(purge_cache(dir, PurgeFilter{"old-model", std::nullopt}), 2u);
  EXPECT_EQ(list_cache(dir).size(), 3u);
  EXPECT_EQ(purge_cache(dir, PurgeFilter{std::nullopt, 1003}), 1u);
  EXPECT_EQ(purge_cache(dir, PurgeFilter{}), 2u);
  EXPECT_TRUE(list_cache(dir).empty());
  EXPECT_EQ(purge_cache(dir, PurgeFilter{}), 0u);
  EXPECT_EQ(purge_cache(dir / "missing", PurgeFilter{}), 0u);
}

TEST(OpenAI, RequestBodyShape) {
  const auto body = nlohmann::json::parse(OpenAIBackend::request_body("hi", GenerationParams("gpt", 0.0, 1.0, 5, 64), true));
  EXPECT_EQ(body["model"], "gpt");
  ASSERT_EQ(body["messages"].size(), 1u);
  EXPECT_EQ(body["messages"][0]["role"], "user");
  EXPECT_EQ(body["messages"][0]["content"], "hi");
  EXPECT_EQ(body["temperature"], 0.0);
  EXPECT_EQ(body["top_p"], 1.0);
  EXPECT_EQ(body["max_tokens"], 64);
  EXPECT_EQ(body["seed"], 5);
  EXPECT_FALSE(nlohmann::json::parse(OpenAIBackend::request_body("hi", GenerationParams("gpt"), false)).contains("seed"));
}

TEST(OpenAI, ParseResponse) {
  const auto r = OpenAIBackend::parse_response(
      R"({"choices":[{"message":{"role":"assistant","content":"Paris"}}],"usage":{"prompt_tokens":3,"completion_tokens":1}})");
  EXPECT_EQ(r.text, "Paris");
  EXPECT_EQ(r.token_usage, (TokenUsage{3, 1}));
  EXPECT_THROW(OpenAIBackend::parse_response("not json"), ProtocolError);
  EXPECT_THROW(OpenAIBackend::parse_response(R"({"choices":[]})"), ProtocolError);
  EXPECT_THROW(OpenAIBackend::parse_response(R"({"choices":[{"message":{"content":null}}]})"), ProtocolError);
}

TEST(OpenAI, RejectsBadBase) {
  EXPECT_THROW(OpenAIBackend(OpenAIConfig{"", "", std::chrono::seconds(1), true}), ConfigError);
  EXPECT_THROW(OpenAIBackend(OpenAIConfig{"localhost:80", "", std::chrono::seconds(1), true}), ConfigError);
}

}  // namespace
}  // namespace s2a
