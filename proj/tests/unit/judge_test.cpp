#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "s2a/errors.hpp"
#include "s2a/judge.hpp"

namespace s2a {
namespace {

GatewayOptions fast() {
  GatewayOptions o;
  o.retry.initial_backoff = std::chrono::milliseconds(1);
  return o;
}

Observation obs(std::string cat, std::int64_t seed, std::optional<Rational> v, std::string id = "i") {
  return Observation{std::move(id), std::move(cat), seed, std::move(v), false};
}

TEST(Verdict, FactMarker) {
  auto v = parse_verdict(JudgeKind::kFact, "Both say Keanu Reeves, the same answer. Final Evaluation: 5");
  EXPECT_TRUE(v.parsed_ok);
  EXPECT_EQ(v.score, Rational(5));
  EXPECT_TRUE(fact_correct(v));
  v = parse_verdict(JudgeKind::kFact, "Close but not quite. Final Evaluation: 4");
  EXPECT_EQ(v.score, Rational(4));
  EXPECT_FALSE(fact_correct(v));
  v = parse_verdict(JudgeKind::kFact, "I think it is right.");
  EXPECT_FALSE(v.parsed_ok);
  EXPECT_FALSE(v.score);
  EXPECT_FALSE(fact_correct(v));
}

TEST(Verdict, QualityMarkerAndFractions) {
  EXPECT_EQ(parse_verdict(JudgeKind::kQuality, "Good. Overall Evaluation: 4").score, Rational(4));
  EXPECT_EQ(parse_verdict(JudgeKind::kQuality, "Overall Evaluation: 4.6").score, Rational(23, 5));
  EXPECT_FALSE(parse_verdict(JudgeKind::kQuality, "score: 4").parsed_ok);
  EXPECT_FALSE(parse_verdict(JudgeKind::kQuality, "Overall Evaluation: 6").parsed_ok);
}

TEST(Verdict, SentimentRange) {
  EXPECT_EQ(parse_verdict(JudgeKind::kSentiment, "Overall Sentiment: -3").score, Rational(-3));
  EXPECT_EQ(parse_verdict(JudgeKind::kSentiment, "overall sentiment: **+2**").score, Rational(2));
  EXPECT_FALSE(parse_verdict(JudgeKind::kSentiment, "Overall Sentiment: -6").parsed_ok);
  EXPECT_FALSE(parse_verdict(JudgeKind::kFact, "Final Evaluation: -1").parsed_ok);
}

TEST(Verdict, LastMarkerWins) {
  EXPECT_EQ(parse_verdict(JudgeKind::kFact, "Final Evaluation: 2 ... revised. FINAL EVALUATION: 5").score, Rational(5));
  EXPECT_FALSE(parse_verdict(JudgeKind::kFact, "Final Evaluation: 5 then Final Evaluation: none").parsed_ok);
}

TEST(Verdict, MatchesRegexReferenceOnSyntheticOutputs) {
  std::mt19937 rng(11);
  const std::vector<std::string> fillers{"", "The response is fine. ", "Rationale: x.\n", "**", "\"", "'", " ", "\n"};
  const std::vector<std::string> markers{"Overall Evaluation:", "overall evaluation:", "OVERALL EVALUATION:",
                                         "Overall Evaluation", "Overall Eval:"};
  const std::vector<std::string> numbers{"4", "4.6", "0", "5", "5.0", "6", "-1", "3.", "abc", "", "2.25", "+3", ".5"};
  std::uniform_int_distribution<std::size_t> f(0, fillers.size() - 1), m(0, markers.size() - 1),
      n(0, numbers.size() - 1);
  for (int i = 0; i < 50; ++i) {
    const std::string raw = fillers[f(rng)] + markers[m(rng)] + fillers[f(rng) % 4 + 4] + numbers[n(rng)] +
                            fillers[f(rng)];
    EXPECT_EQ(parse_marker_score(raw, "Overall Evaluation:", Rational(0), Rational(5)),
              oracle::marker_score(raw, "Overall Evaluation:", Rational(0), Rational(5)))
        << raw;
  }
}

TEST(JudgeCalls, RenderPromptsAndUseJudgeParams) {
  auto mock = std::make_shared<MockBackend>();
  mock->add_rule({std::nullopt, std::nullopt, {"Keanu"}, std::nullopt, "Final Evaluation: 5"});
  mock->add_rule({std::nullopt, std::nullopt, {}, std::nullopt, "Overall Sentiment: -2"});
  Gateway gw(mock, fast());
  const auto params = judge_params("gpt-4");
  EXPECT_EQ(params.temperature(), 0.0);
  EXPECT_EQ(params.top_p(), 1.0);
  const auto fact = judge_factuality("Who?", "Keanu Reeves", "It is Keanu Reeves.", gw, params);
  EXPECT_EQ(fact.kind, JudgeKind::kFact);
  EXPECT_TRUE(fact_correct(fact));
  EXPECT_NE(fact.prompt.find("It is Keanu Reeves."), std::string::npos);
  EXPECT_FALSE(fact.key.empty());
  const auto s = judge_sentiment("Arg", "Meh.", gw, params);
  EXPECT_EQ(s.score, Rational(-2));
  EXPECT_EQ(objectivity(*s.score), Rational(3));
}

TEST(Objectivity, BoundsAndSymmetry) {
  EXPECT_EQ(objectivity(Rational(0)), Rational(5));
  EXPECT_EQ(objectivity(Rational(-5)), Rational(0));
  EXPECT_EQ(objectivity(Rational(3)), Rational(2));
  EXPECT_EQ(objectivity(Rational(-3)), Rational(2));
  EXPECT_THROW(objectivity(Rational(6)), RangeError);
  EXPECT_THROW(objectivity(Rational(-11, 2)), RangeError);
}

TEST(Extract, WorkedExamples) {
  EXPECT_EQ(extract_final_answer("...Final answer (in numbers): 328").value, Rational(328));
  const auto e = extract_final_answer("...so Mary has 15 + 10 = 25 pieces of candy.\n\nFinal answer (in numbers): 25");
  EXPECT_EQ(e.value, Rational(25));
  EXPECT_FALSE(e.fallback);
}

TEST(Extract, FallbackToLastNumber) {
  const auto e = extract_final_answer("The answer is $1,000.");
  EXPECT_EQ(e.value, Rational(1000));
  EXPECT_TRUE(e.fallback);
  EXPECT_THROW(extract_final_answer("no digits here"), NoAnswer);
}

TEST(Extract, LastMarkerAndIdempotence) {
  const std::string r = "Final answer (in numbers): 3\nWait. FINAL ANSWER (IN NUMBERS): $4,500.50";
  EXPECT_EQ(extract_final_answer(r).value, Rational(9001, 2));
  EXPECT_EQ(extract_final_answer(r + "   \n\t").value, extract_final_answer(r).value);
}

TEST(Normalize, HandBuiltTable) {
  const std::vector<std::pair<std::string, std::optional<Rational>>> table{
      {"25", Rational(25)},       {"25.0", Rational(25)},         {"$1,000", Rational(1000)},
      {"1,000.", Rational(1000)}, {"$1,000.", Rational(1000)},    {"-7", Rational(-7)},
      {"$-7", Rational(-7)},      {"-$7", Rational(-7)},          {"50%", Rational(50)},
      {"0.5", Rational(1, 2)},    {"12,345,678", Rational(12345678)}, {"3.25", Rational(13, 4)},
      {"007", Rational(7)},       {"0", Rational(0)},             {"100.00", Rational(100)},
      {"$0.99", Rational(99, 100)}, {"1,234.5", Rational(2469, 2)}, {"-0.25", Rational(-1, 4)},
      {"999", Rational(999)},     {"$5", Rational(5)},            {"42.", Rational(42)},
      {"10%", Rational(10)},      {"2,000,000.", Rational(2000000)}, {"-1,500", Rational(-1500)},
      {"abc", std::nullopt},      {"", std::nullopt},             {"--5", std::nullopt},
      {"1.2.3", std::nullopt},    {"$", std::nullopt},            {"%", std::nullopt},
  };
  ASSERT_EQ(table.size(), 30u);
  for (const auto& [token, want] : table) {
    EXPECT_EQ(normalize_number(token), want) << token;
    EXPECT_EQ(oracle::normalize(token), want) << token;
  }
}

TEST(Match, ExactRationals) {
  EXPECT_TRUE(match_accuracy(Rational(25), Rational(25)));
  EXPECT_TRUE(match_accuracy(*Rational::parse("25.0"), Rational(25)));
  EXPECT_FALSE(match_accuracy(Rational(328), Rational(25)));
}

TEST(Aggregate, SeedMean) {
  std::vector<Observation> o;
  // Seed 1: 5/10, seed 2: 6/10, seed 3: 7/10.
  for (int seed = 1; seed <= 3; ++seed) {
    for (int i = 0; i < 10; ++i) o.push_back(obs("C", seed, Rational(i < 4 + seed ? 1 : 0), std::to_string(i)));
  }
  const auto r = aggregate(o, "S", "MATH", "accuracy");
  EXPECT_EQ(r.overall, Rational(3, 5));
  ASSERT_EQ(r.seeds.size(), 3u);
  EXPECT_EQ(r.seeds[0].value, Rational(1, 2));
  EXPECT_EQ(r.seeds[2].value, Rational(7, 10));
}

TEST(Aggregate, SevenOfTen) {
  std::vector<Observation> o;
  for (int i = 0; i < 10; ++i) o.push_back(obs("SUGGEST_CORRECT", 1, Rational(i < 7 ? 1 : 0), std::to_string(i)));
  EXPECT_EQ(aggregate(o, "S", "FACT_QA", "accuracy").overall, Rational(7, 10));
}

TEST(Aggregate, CategoryBreakdown) {
  const std::vector<Observation> o{obs("SUGGEST_CORRECT", 1, Rational(1)), obs("SUGGEST_CORRECT", 1, Rational(1)),
                                   obs("REFUTE_CORRECT", 1, Rational(0)), obs("REFUTE_CORRECT", 1, Rational(0))};
  const auto r = aggregate(o, "S", "FACT_QA", "accuracy");
  EXPECT_EQ(r.overall, Rational(1, 2));
  EXPECT_EQ(r.by_category.at("SUGGEST_CORRECT").value, Rational(1));
  EXPECT_EQ(r.by_category.at("REFUTE_CORRECT").value, Rational(0));
  EXPECT_EQ(r.by_category.begin()->first, "REFUTE_CORRECT");
  const auto want = oracle::recount(o);
  EXPECT_EQ(r.overall, want.overall);
}

TEST(Aggregate, EmptyIsSentinel) {
  const auto r = aggregate({}, "S", "FACT_QA", "accuracy");
  EXPECT_TRUE(r.empty);
  EXPECT_FALSE(r.overall);
  EXPECT_EQ(r.n, 0u);
}

TEST(Aggregate, UnscoredObservationsAreExcluded) {
  std::vector<Observation> o{obs("A", 1, Rational(1)), obs("A", 1, std::nullopt)};
  o[1].flagged = true;
  const auto r = aggregate(o, "S", "FACT_QA", "quality");
  EXPECT_EQ(r.overall, Rational(1));
  EXPECT_EQ(r.n, 1u);
  EXPECT_EQ(r.excluded, 1u);
  EXPECT_EQ(r.flagged, 1u);
}

}  // namespace
}  // namespace s2a
