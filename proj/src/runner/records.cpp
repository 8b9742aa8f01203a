#include <algorithm>
#include <fstream>

#include "s2a/errors.hpp"
#include "s2a/runner.hpp"

namespace s2a {

using nlohmann::json;

namespace {

json opt_rational(const std::optional<Rational>& r) { return r ? json(r->str()) : json(nullptr); }

std::optional<Rational> rational_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  auto r = Rational::parse(j.get<std::string>());
  if (!r) throw ProtocolError("bad rational in run log: " + j.get<std::string>());
  return r;
}

json prompt_json(const RenderedPrompt& p) {
  json bindings = json::object();
  for (const auto& [k, v] : p.bindings) bindings[k] = v;
  return json{{"template", p.template_id ? json(std::string(to_string(*p.template_id))) : json(nullptr)},
              {"text", p.text},
              {"bindings", bindings}};
}

RenderedPrompt prompt_from(const json& j) {
  RenderedPrompt p;
  p.text = j.at("text").get<std::string>();
  if (!j.at("template").is_null()) p.template_id = template_from_string(j["template"].get<std::string>());
  for (const auto& [k, v] : j.at("bindings").items()) p.bindings[k] = v.get<std::string>();
  return p;
}

json completion_json(const Completion& c) {
  json j{{"text", c.text},
         {"backend_id", c.backend_id},
         {"cached", c.cached},
         {"latency_ms", c.latency.count()},
         {"key", c.key}};
  j["token_usage"] = c.token_usage ? json{{"prompt", c.token_usage->prompt}, {"completion", c.token_usage->completion}}
                                   : json(nullptr);
  return j;
}

Completion completion_from(const json& j) {
  Completion c;
  c.text = j.at("text").get<std::string>();
  c.backend_id = j.at("backend_id").get<std::string>();
  c.cached = j.at("cached").get<bool>();
  c.latency = std::chrono::milliseconds(j.at("latency_ms").get<std::int64_t>());
  c.key = j.at("key").get<std::string>();
  if (j.contains("token_usage") && !j["token_usage"].is_null()) {
    c.token_usage = TokenUsage{j["token_usage"].at("prompt").get<std::int64_t>(),
                               j["token_usage"].at("completion").get<std::int64_t>()};
  }
  return c;
}

json regen_json(const RegeneratedContext& r) {
  return json{{"context_part", r.context_part},   {"question_part", r.question_part},
              {"raw", r.raw},                     {"strategy", std::string(to_string(r.strategy))},
              {"fallback", r.fallback},           {"needs_review", r.needs_review},
              {"preamble", r.preamble},           {"context_label", r.context_label},
              {"question_label", r.question_label}, {"question_first", r.question_first}};
}

RegeneratedContext regen_from(const json& j) {
  RegeneratedContext r;
  r.context_part = j.at("context_part").get<std::string>();
  r.question_part = j.at("question_part").get<std::string>();
  r.raw = j.at("raw").get<std::string>();
  r.strategy = strategy_from_string(j.at("strategy").get<std::string>()).value_or(Strategy::kS2aDefault);
  r.fallback = j.at("fallback").get<bool>();
  r.needs_review = j.at("needs_review").get<bool>();
  r.preamble = j.at("preamble").get<std::string>();
  r.context_label = j.at("context_label").get<std::string>();
  r.question_label = j.at("question_label").get<std::string>();
  r.question_first = j.at("question_first").get<bool>();
  return r;
}

json verdict_json(const JudgeVerdict& v) {
  return json{{"kind", std::string(to_string(v.kind))}, {"prompt", v.prompt}, {"raw", v.raw},
              {"key", v.key}, {"score", opt_rational(v.score)}, {"parsed_ok", v.parsed_ok}};
}

JudgeVerdict verdict_from(const json& j) {
  JudgeVerdict v;
  v.kind = judge_kind_from_string(j.at("kind").get<std::string>()).value_or(JudgeKind::kFact);
  v.prompt = j.at("prompt").get<std::string>();
  v.raw = j.at("raw").get<std::string>();
  v.key = j.at("key").get<std::string>();
  v.score = rational_from(j.at("score"));
  v.parsed_ok = j.at("parsed_ok").get<bool>();
  return v;
}

void add_flag(RunRecord& r, std::string flag) {
  if (!r.has_flag(flag)) r.flags.push_back(std::move(flag));
}

}  // namespace

bool RunRecord::has_flag(std::string_view f) const { return std::find(flags.begin(), flags.end(), f) != flags.end(); }

json to_json(const RunRecord& r) {
  json trace{{"step1_prompt", r.trace.step1_prompt ? prompt_json(*r.trace.step1_prompt) : json(nullptr)},
             {"step1_completion", r.trace.step1_completion ? completion_json(*r.trace.step1_completion) : json(nullptr)},
             {"regenerated", r.trace.regenerated ? regen_json(*r.trace.regenerated) : json(nullptr)},
             {"step2_prompt", prompt_json(r.trace.step2_prompt)},
             {"final", completion_json(r.trace.final)}};
  json verdicts = json::array();
  for (const auto& v : r.verdicts) verdicts.push_back(verdict_json(v));
  json derived{{"correct", r.derived.correct ? json(*r.derived.correct) : json(nullptr)},
               {"quality", opt_rational(r.derived.quality)},
               {"sentiment", opt_rational(r.derived.sentiment)},
               {"objectivity", opt_rational(r.derived.objectivity)},
               {"extracted", opt_rational(r.derived.extracted)}};
  return json{{"type", "record"},
              {"instance_id", r.instance_id},
              {"task_kind", std::string(to_string(r.task_kind))},
              {"category", std::string(to_string(r.category))},
              {"strategy", std::string(to_string(r.strategy))},
              {"seed", r.seed},
              {"trace", trace},
              {"verdicts", verdicts},
              {"derived", derived},
              {"flags", r.flags}};
}

RunRecord record_from_json(const json& j) {
  RunRecord r;
  try {
    r.instance_id = j.at("instance_id").get<std::string>();
    const auto kind = task_kind_from_string(j.at("task_kind").get<std::string>());
    const auto category = category_from_string(j.at("category").get<std::string>());
    const auto strategy = strategy_from_string(j.at("strategy").get<std::string>());
    if (!kind || !category || !strategy) throw ProtocolError("run log record has unknown enum value");
    r.task_kind = *kind;
    r.category = *category;
    r.strategy = *strategy;
    r.seed = j.at("seed").get<std::int64_t>();
    const auto& t = j.at("trace");
    if (!t.at("step1_prompt").is_null()) r.trace.step1_prompt = prompt_from(t["step1_prompt"]);
    if (!t.at("step1_completion").is_null()) r.trace.step1_completion = completion_from(t["step1_completion"]);
    if (!t.at("regenerated").is_null()) r.trace.regenerated = regen_from(t["regenerated"]);
    r.trace.step2_prompt = prompt_from(t.at("step2_prompt"));
    r.trace.final = completion_from(t.at("final"));
    for (const auto& v : j.at("verdicts")) r.verdicts.push_back(verdict_from(v));
    const auto& d = j.at("derived");
    if (!d.at("correct").is_null()) r.derived.correct = d["correct"].get<bool>();
    r.derived.quality = rational_from(d.at("quality"));
    r.derived.sentiment = rational_from(d.at("sentiment"));
    r.derived.objectivity = rational_from(d.at("objectivity"));
    r.derived.extracted = rational_from(d.at("extracted"));
    r.flags = j.at("flags").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed run log record: ") + e.what());
  }
  return r;
}

json to_json(const RunLogHeader& h) {
  json skipped = json::array();
  for (const auto& s : h.skipped) skipped.push_back(json{{"id", s.id}, {"reason", s.reason}});
  return json{{"type", "header"},
              {"config_hash", h.config_hash},
              {"task_kind", h.task_kind},
              {"strategies", h.strategies},
              {"generation_model", h.generation_model},
              {"judge_model", h.judge_model},
              {"skipped", skipped}};
}

RunLogHeader header_from_json(const json& j) {
  RunLogHeader h;
  try {
    h.config_hash = j.at("config_hash").get<std::string>();
    h.task_kind = j.at("task_kind").get<std::string>();
    h.strategies = j.at("strategies").get<std::vector<std::string>>();
    h.generation_model = j.at("generation_model").get<std::string>();
    h.judge_model = j.at("judge_model").get<std::string>();
    for (const auto& s : j.at("skipped")) {
      h.skipped.push_back({s.at("id").get<std::string>(), s.at("reason").get<std::string>()});
    }
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed run log header: ") + e.what());
  }
  return h;
}

RunLog read_run_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFound("run log not found: " + path.string());
  RunLog log;
  std::string line;
  std::size_t index = 0;
  while (std::getline(in, line)) {
    ++index;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception&) {
      // A crash mid-append can leave a torn final line; anything earlier is corruption.
      if (in.peek() == std::char_traits<char>::eof()) break;
      throw ProtocolError(path.string() + ":" + std::to_string(index) + ": not valid JSON");
    }
    const auto type = j.value("type", std::string{});
    if (type == "header") {
      log.header = header_from_json(j);
    } else if (type == "record") {
      log.records.push_back(record_from_json(j));
    }
  }
  return log;
}

std::vector<std::string> metrics_for(TaskKind kind) {
  if (kind == TaskKind::kArgument) return {"quality", "objectivity"};
  return {"accuracy"};
}

RunRecord score_record(const TaskInstance& instance, Strategy strategy, std::int64_t seed, Trace trace,
                       Gateway* judge, const GenerationParams* judge_params) {
  RunRecord r;
  r.instance_id = instance.id;
  r.task_kind = instance.task_kind;
  r.category = instance.perturbation.category;
  r.strategy = strategy;
  r.seed = seed;
  r.trace = std::move(trace);
  if (r.trace.regenerated) {
    if (r.trace.regenerated->fallback) add_flag(r, "step1_fallback");
    if (r.trace.regenerated->needs_review) add_flag(r, "needs_review");
  }
  const std::string& response = r.trace.final.text;

  switch (instance.task_kind) {
    case TaskKind::kFactQa: {
      if (!judge || !judge_params) throw ConfigError("FACT_QA scoring needs a judge");
      auto v = judge_factuality(instance.clean_prompt, instance.gold.answer_text.value_or(""), response, *judge,
                                *judge_params);
      if (v.parsed_ok) {
        r.derived.correct = fact_correct(v);
      } else {
        add_flag(r, "judge_unparsed");
      }
      r.verdicts.push_back(std::move(v));
      break;
    }
    case TaskKind::kArgument: {
      if (!judge || !judge_params) throw ConfigError("ARGUMENT scoring needs a judge");
      auto q = judge_quality(instance.clean_prompt, response, *judge, *judge_params);
      auto s = judge_sentiment(instance.clean_prompt, response, *judge, *judge_params);
      r.derived.quality = q.score;
      r.derived.sentiment = s.score;
      if (s.score) r.derived.objectivity = objectivity(*s.score);
      if (!q.parsed_ok || !s.parsed_ok) add_flag(r, "judge_unparsed");
      r.verdicts.push_back(std::move(q));
      r.verdicts.push_back(std::move(s));
      break;
    }
    case TaskKind::kMath: {
      try {
        const auto answer = extract_final_answer(response);
        r.derived.extracted = answer.value;
        r.derived.correct = instance.gold.answer_number && match_accuracy(answer.value, *instance.gold.answer_number);
        if (answer.fallback) add_flag(r, "extraction_fallback");
      } catch (const NoAnswer&) {
        r.derived.correct = false;
        add_flag(r, "no_answer");
      }
      break;
    }
  }
  return r;
}

std::vector<Observation> observations(const std::vector<RunRecord>& records, std::string_view metric) {
  std::vector<Observation> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    Observation o;
    o.instance_id = r.instance_id;
    o.category = std::string(to_string(r.category));
    o.seed = r.seed;
    o.flagged = r.flagged();
    if (metric == "accuracy") {
      if (r.derived.correct) o.value = Rational(*r.derived.correct ? 1 : 0);
    } else if (metric == "quality") {
      o.value = r.derived.quality;
    } else if (metric == "objectivity") {
      o.value = r.derived.objectivity;
    }
    out.push_back(std::move(o));
  }
  return out;
}

std::vector<RecordedCall> collect_calls(const std::vector<RunRecord>& records, CallSource source) {
  std::vector<RecordedCall> out;
  for (const auto& r : records) {
    if (source != CallSource::kJudge) {
      if (r.trace.step1_prompt && r.trace.step1_completion) {
        out.push_back({r.trace.step1_completion->key, r.trace.step1_prompt->text, r.trace.step1_completion->text});
      }
      out.push_back({r.trace.final.key, r.trace.step2_prompt.text, r.trace.final.text});
    }
    if (source != CallSource::kGeneration) {
      for (const auto& v : r.verdicts) out.push_back({v.key, v.prompt, v.raw});
    }
  }
  return out;
}

}  // namespace s2a
