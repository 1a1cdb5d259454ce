#include "weir/memory.hpp"

#include <algorithm>

#include "weir/errors.hpp"

namespace weir {

using nlohmann::json;

namespace {

json response_to_json(const PlannerResponse& r) {
  return json{
      {"reflection", r.reflection},
      {"plan_and_status", r.plan_and_status},
      {"fact_check", r.fact_check},
      {"thought", r.thought},
      {"action_name", r.action_name},
      {"action_input", r.action_input},
  };
}

PlannerResponse response_from_json(const json& j) {
  PlannerResponse r;
  r.reflection = j.at("reflection").get<std::string>();
  r.plan_and_status = j.at("plan_and_status").get<std::string>();
  r.fact_check = j.at("fact_check").get<std::string>();
  r.thought = j.at("thought").get<std::string>();
  r.action_name = j.at("action_name").get<std::string>();
  r.action_input = j.at("action_input");
  return r;
}

json observation_to_json(const Observation& o) {
  json j{
      {"text", o.text},
      {"truncated", o.truncated},
      {"source_action", o.source_action},
  };
  if (o.exit_status) j["exit_status"] = *o.exit_status;
  return j;
}

Observation observation_from_json(const json& j) {
  Observation o;
  o.text = j.at("text").get<std::string>();
  o.truncated = j.at("truncated").get<bool>();
  o.source_action = j.at("source_action").get<std::string>();
  if (j.contains("exit_status")) o.exit_status = j.at("exit_status").get<int>();
  return o;
}

json attempt_to_json(const EscalationAttempt& a) {
  return json{
      {"tier", a.tier_index},
      {"model_id", a.model_id},
      {"attempt", a.attempt_no},
      {"outcome", std::string(to_string(a.outcome))},
      {"detail", a.detail},
      {"usage_event_id", a.usage_event_id},
      {"channel", a.channel},
      {"reason", a.escalation_reason},
  };
}

EscalationAttempt attempt_from_json(const json& j) {
  EscalationAttempt a;
  a.tier_index = j.at("tier").get<int>();
  a.model_id = j.at("model_id").get<std::string>();
  a.attempt_no = j.at("attempt").get<int>();
  const std::string outcome = j.at("outcome").get<std::string>();
  if (outcome == "accepted") {
    a.outcome = EscalationAttempt::Outcome::accepted;
  } else if (outcome == "format_failure") {
    a.outcome = EscalationAttempt::Outcome::format_failure;
  } else if (outcome == "repeat_discarded") {
    a.outcome = EscalationAttempt::Outcome::repeat_discarded;
  } else {
    throw Error("unknown escalation outcome '" + outcome + "'");
  }
  a.detail = j.at("detail").get<std::string>();
  a.usage_event_id = j.at("usage_event_id").get<std::int64_t>();
  a.channel = j.at("channel").get<std::string>();
  a.escalation_reason = j.value("reason", "");
  return a;
}

json usage_to_json(const UsageEvent& e) {
  return json{
      {"id", e.id},
      {"step_index", e.step_index},
      {"model_id", e.model_id},
      {"purpose", std::string(to_string(e.purpose))},
      {"tokens_in", e.tokens_in},
      {"tokens_out", e.tokens_out},
  };
}

UsageEvent usage_from_json(const json& j) {
  UsageEvent e;
  e.id = j.at("id").get<std::int64_t>();
  e.step_index = j.at("step_index").get<int>();
  e.model_id = j.at("model_id").get<std::string>();
  e.purpose = purpose_from_string(j.at("purpose").get<std::string>());
  e.tokens_in = j.at("tokens_in").get<std::int64_t>();
  e.tokens_out = j.at("tokens_out").get<std::int64_t>();
  return e;
}

}  // namespace

json step_to_json(const StepRecord& record) {
  json escalation = json::array();
  for (const auto& a : record.escalation_trace) escalation.push_back(attempt_to_json(a));
  json usage = json::array();
  for (const auto& e : record.usage_events) usage.push_back(usage_to_json(e));

  return json{
      {"type", "step"},
      {"index", record.index},
      {"response", response_to_json(record.planner_response)},
      {"escalation", std::move(escalation)},
      {"action", json{{"name", record.action_name}, {"input", record.action_input}}},
      {"observation", observation_to_json(record.observation)},
      {"usage_event_ids", record.usage_event_ids},
      {"usage_events", std::move(usage)},
  };
}

StepRecord step_from_json(const json& j) {
  StepRecord record;
  record.index = j.at("index").get<int>();
  record.planner_response = response_from_json(j.at("response"));
  for (const auto& a : j.at("escalation")) {
    record.escalation_trace.push_back(attempt_from_json(a));
  }
  record.action_name = j.at("action").at("name").get<std::string>();
  record.action_input = j.at("action").at("input");
  record.observation = observation_from_json(j.at("observation"));
  record.usage_event_ids = j.at("usage_event_ids").get<std::vector<std::int64_t>>();
  for (const auto& e : j.at("usage_events")) {
    record.usage_events.push_back(usage_from_json(e));
  }
  return record;
}

void ResearchLog::append_step(StepRecord record) {
  if (record.index != static_cast<int>(records_.size())) {
    throw IndexGap("appending step " + std::to_string(record.index) + " to a log of length " +
                   std::to_string(records_.size()));
  }
  records_.push_back(std::move(record));
}

std::span<const StepRecord> ResearchLog::recent_window(int k) const {
  if (k <= 0) return {};
  const std::size_t take = std::min(static_cast<std::size_t>(k), records_.size());
  return std::span<const StepRecord>(records_).last(take);
}

std::string summarize_steps(std::span<const StepRecord> steps) {
  std::string out;
  for (const auto& step : steps) {
    out += "Step " + std::to_string(step.index) + ":\n";
    out += serialize_response(step.planner_response);
    out += "Observation:\n";
    out += step.observation.text;
    if (step.observation.exit_status) {
      out += "\n(exit status: " + std::to_string(*step.observation.exit_status) + ")";
    }
    out += "\n\n";
  }
  return out;
}

namespace {

// Model text and subprocess output are arbitrary bytes; malformed UTF-8 is
// replaced rather than allowed to abort the trace.
std::string dump_line(const json& j) {
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

}  // namespace

TraceWriter::TraceWriter(std::filesystem::path file, const json& header)
    : path_(std::move(file)) {
  out_.open(path_, std::ios::out | std::ios::trunc | std::ios::binary);
  if (!out_.is_open()) throw Error("cannot open trace file '" + path_.string() + "'");
  write_line(dump_line(header));
}

void TraceWriter::write_line(const std::string& line) {
  out_ << line << '\n';
  out_.flush();
  if (!out_.good()) throw Error("failed writing trace '" + path_.string() + "'");
}

void TraceWriter::append(const StepRecord& record) { write_line(dump_line(step_to_json(record))); }

void TraceWriter::finalize(const json& result) { write_line(dump_line(result)); }

RunTrace read_trace(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in.is_open()) throw Error("cannot open trace file '" + file.string() + "'");
  const std::string content((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());

  RunTrace trace;
  trace.path = file;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    const bool terminated = end != std::string::npos;
    if (!terminated) end = content.size();
    const std::string_view line(content.data() + start, end - start);
    start = end + 1;
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("type")) {
      // a torn, unterminated final line is the in-flight record of a killed
      // run; everything before it is intact
      if (!terminated && line_no > 1) break;
      throw TraceCorrupt(line_no, "not a trace record");
    }
    const std::string type = j.value("type", "");
    if (type == "header") {
      if (line_no != 1) throw TraceCorrupt(line_no, "header must be the first line");
      trace.header = std::move(j);
    } else if (type == "step") {
      if (trace.header.is_null()) throw TraceCorrupt(line_no, "step before header");
      try {
        trace.steps.push_back(step_from_json(j));
      } catch (const std::exception& e) {
        throw TraceCorrupt(line_no, e.what());
      }
    } else if (type == "result") {
      trace.result = std::move(j);
    } else {
      throw TraceCorrupt(line_no, "unknown record type '" + type + "'");
    }
  }
  if (trace.header.is_null()) throw TraceCorrupt(1, "missing header line");
  if (!trace.header.contains("version")) throw TraceCorrupt(1, "header has no version field");
  return trace;
}

RetrievedContext retrieve(const ResearchLog& log, const std::string& current_plan, bool enabled,
                          int short_term_k, Gateway& gateway, const ModelDescriptor& worker,
                          const RetrievalParams& params, const std::string& run_id,
                          int step_index) {
  RetrievedContext context;
  if (!enabled || log.records().empty()) return context;

  const std::size_t total = log.size();
  const std::size_t window = short_term_k < 0 ? 0 : static_cast<std::size_t>(short_term_k);
  if (total <= window) return context;  // nothing older than the window
  const std::size_t older = total - window;

  std::string history =
      summarize_steps(std::span<const StepRecord>(log.records()).first(older));
  history = truncate_middle(history, params.max_chars);

  CompletionRequest request;
  request.prompt =
      "Below is the research log of the current task, oldest steps first.\n\n" + history +
      "The current research plan and status:\n" + current_plan +
      "\n\nSummarize the information from the log that is most relevant to the current "
      "plan. Be concise and concrete; include file names, numbers and outcomes.";
  request.temperature = params.temperature;
  request.max_output_tokens = params.max_output_tokens;

  context.from_step = 0;
  context.to_step = static_cast<int>(older) - 1;
  try {
    const CompletionOutcome call = gateway.complete(
        worker, request, UsageContext{run_id, step_index, Purpose::retrieval});
    context.summary = call.result.text;
    context.produced_by = worker.id;
  } catch (const ScriptExhausted&) {
    throw;  // a scripted queue running dry is a test bug, never best-effort
  } catch (const Error& e) {
    // best effort: the run continues without retrieved context
    context.summary.clear();
    context.produced_by = worker.id;
    context.error = e.what();
  }
  return context;
}

}  // namespace weir
