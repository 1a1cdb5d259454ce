#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "support.hpp"
#include "weir/errors.hpp"
#include "weir/ledger.hpp"
#include "weir/memory.hpp"

using namespace weir;
using namespace weir::testing;
using nlohmann::json;

namespace {

StepRecord make_record(int index) {
  StepRecord record;
  record.index = index;
  record.planner_response.reflection = "r" + std::to_string(index);
  record.planner_response.plan_and_status = "plan";
  record.planner_response.fact_check = "fc";
  record.planner_response.thought = "t";
  record.planner_response.action_name = "List Files";
  record.planner_response.action_input = {{"dir_path", "."}};
  record.action_name = record.planner_response.action_name;
  record.action_input = record.planner_response.action_input;
  record.observation = Observation::make("List Files", "listing " + std::to_string(index));
  EscalationAttempt attempt;
  attempt.model_id = "base";
  attempt.usage_event_id = index;
  record.escalation_trace.push_back(attempt);
  UsageEvent event;
  event.id = index;
  event.step_index = index;
  event.model_id = "base";
  event.purpose = Purpose::planning;
  event.tokens_in = 10;
  event.tokens_out = 5;
  record.usage_events.push_back(event);
  record.usage_event_ids.push_back(index);
  return record;
}

ResearchLog log_of(int n) {
  ResearchLog log(json{{"run_id", "r"}});
  for (int i = 0; i < n; ++i) log.append_step(make_record(i));
  return log;
}

}  // namespace

TEST_CASE("append enforces gapless indices") {
  ResearchLog log;
  log.append_step(make_record(0));
  CHECK(log.size() == 1);
  CHECK_THROWS_AS(log.append_step(make_record(2)), IndexGap);
  log.append_step(make_record(1));
  CHECK(log.size() == 2);
}

TEST_CASE("step records serialize losslessly") {
  const StepRecord original = make_record(3);
  const StepRecord back = step_from_json(step_to_json(original));
  CHECK(step_to_json(back) == step_to_json(original));
  CHECK(back.planner_response == original.planner_response);
  CHECK(back.observation.text == original.observation.text);
  CHECK(back.usage_event_ids == original.usage_event_ids);
  CHECK(back.escalation_trace.size() == 1);
}

TEST_CASE("recent window returns the last min(k, len) records in order") {
  const ResearchLog log = log_of(5);
  const auto window = log.recent_window(3);
  REQUIRE(window.size() == 3);
  CHECK(window[0].index == 2);
  CHECK(window[2].index == 4);

  CHECK(log_of(2).recent_window(3).size() == 2);
  CHECK(log.recent_window(0).empty());
}

TEST_CASE("trace files are durable line by line") {
  TempDir dir("trace");
  const auto path = dir.path / "trace.jsonl";
  TraceWriter writer(path, json{{"type", "header"}, {"version", 1}, {"run_id", "r"}});
  writer.append(make_record(0));
  writer.append(make_record(1));

  // no finalize, no close: both steps are already on disk
  const RunTrace trace = read_trace(path);
  CHECK(trace.header["run_id"] == "r");
  REQUIRE(trace.steps.size() == 2);
  CHECK(trace.steps[1].index == 1);
  CHECK_FALSE(trace.result.has_value());

  writer.finalize(json{{"type", "result"}, {"status", "Completed"}});
  const RunTrace done = read_trace(path);
  REQUIRE(done.result.has_value());
  CHECK((*done.result)["status"] == "Completed");
}

TEST_CASE("a torn final line reads as the lost in-flight step") {
  TempDir dir("torn");
  const auto path = dir.path / "torn.jsonl";
  std::string content;
  content += json{{"type", "header"}, {"version", 1}, {"run_id", "r"}}.dump() + "\n";
  content += step_to_json(make_record(0)).dump() + "\n";
  const std::string full_step = step_to_json(make_record(1)).dump();
  content += full_step.substr(0, full_step.size() / 2);  // killed mid-write, no newline
  write_file(path, content);

  const RunTrace trace = read_trace(path);
  REQUIRE(trace.steps.size() == 1);  // the torn step is the in-flight loss
  CHECK(trace.steps[0].index == 0);

  // a torn line that is NOT final (a newline follows) is still corruption
  write_file(path, content + "\n" + full_step + "\n");
  CHECK_THROWS_AS(read_trace(path), TraceCorrupt);
}

TEST_CASE("corrupt trace lines carry their line number") {
  TempDir dir("corrupt");
  const auto path = dir.path / "bad.jsonl";
  std::string content;
  content += json{{"type", "header"}, {"version", 1}}.dump() + "\n";
  for (int i = 0; i < 3; ++i) content += step_to_json(make_record(i)).dump() + "\n";
  content += "{this is not json\n";  // line 5
  write_file(path, content);

  try {
    read_trace(path);
    FAIL("expected TraceCorrupt");
  } catch (const TraceCorrupt& e) {
    CHECK(e.line_number == 5);
  }
}

namespace {

struct RetrieveRig {
  CostLedger ledger;
  Gateway gateway;
  ModelDescriptor worker;

  explicit RetrieveRig(std::vector<std::string> replies)
      : gateway(ledger), worker(scripted_model("worker", std::move(replies))) {
    gateway.bind("worker", std::make_unique<ScriptedBackend>(
                               std::get<ScriptedEndpoint>(worker.endpoint)));
  }

  RetrievedContext run(const ResearchLog& log, bool enabled, int k) {
    return retrieve(log, "current plan", enabled, k, gateway, worker, RetrievalParams{}, "run",
                    static_cast<int>(log.size()));
  }
};

}  // namespace

TEST_CASE("retrieval disabled: empty context, zero model calls") {
  RetrieveRig rig({});
  const RetrievedContext context = rig.run(log_of(10), false, 3);
  CHECK(context.empty());
  CHECK(context.produced_by == "disabled");
  CHECK(rig.ledger.events().empty());
}

TEST_CASE("nothing older than the window: empty context, zero calls") {
  RetrieveRig rig({});
  CHECK(rig.run(log_of(0), true, 3).empty());
  CHECK(rig.run(log_of(2), true, 3).empty());
  CHECK(rig.run(log_of(3), true, 3).empty());
  CHECK(rig.ledger.events().empty());
}

TEST_CASE("10 steps with k=3 summarizes exactly steps 0-6") {
  RetrieveRig rig({"the summary"});
  const ResearchLog log = log_of(10);
  const RetrievedContext context = rig.run(log, true, 3);
  CHECK(context.summary == "the summary");
  CHECK(context.from_step == 0);
  CHECK(context.to_step == 6);
  CHECK(context.produced_by == "worker");
  REQUIRE(rig.ledger.events().size() == 1);
  CHECK(rig.ledger.events()[0].purpose == Purpose::retrieval);

  // the retrieval prompt covers 0..6 and excludes the window 7..9
  const auto& prompt = scripted_backend(rig.gateway, "worker")->requests()[0].prompt;
  CHECK(prompt.find("Step 0:") != std::string::npos);
  CHECK(prompt.find("Step 6:") != std::string::npos);
  CHECK(prompt.find("Step 7:") == std::string::npos);
  CHECK(prompt.find("current plan") != std::string::npos);
}

TEST_CASE("short-term and long-term never overlap") {
  std::mt19937 rng(99);
  std::uniform_int_distribution<int> len(0, 25);
  std::uniform_int_distribution<int> kd(0, 6);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = len(rng);
    const int k = kd(rng);
    const ResearchLog log = log_of(n);
    const auto window = log.recent_window(k);
    RetrieveRig rig({"s"});
    const RetrievedContext context = rig.run(log, true, k);
    if (context.empty()) continue;
    for (const auto& record : window) {
      CHECK((record.index < context.from_step || record.index > context.to_step));
    }
    // and together they cover the whole log
    CHECK(context.to_step + 1 == (n - static_cast<int>(window.size())));
  }
}

namespace {

class OfflineBackend : public Backend {
 public:
  CompletionResult complete(const ModelDescriptor&, const CompletionRequest&) override {
    throw TransportError("network down");
  }
};

}  // namespace

TEST_CASE("retrieval transport failures degrade to an empty context with a marker") {
  RetrieveRig rig({});
  rig.gateway.bind("worker", std::make_unique<OfflineBackend>());
  const RetrievedContext context = rig.run(log_of(10), true, 3);
  CHECK(context.empty());
  CHECK(context.error.find("network down") != std::string::npos);

  // a scripted queue running dry stays fatal: that is a test bug
  RetrieveRig dry({});
  CHECK_THROWS_AS(dry.run(log_of(10), true, 3), ScriptExhausted);
}
