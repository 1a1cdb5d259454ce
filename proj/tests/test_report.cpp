#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"
#include "weir/config.hpp"
#include "weir/errors.hpp"
#include "weir/orchestrator.hpp"
#include "weir/report.hpp"

using namespace weir;
using namespace weir::testing;
using nlohmann::json;

namespace {

// A paid two-tier run that exercises escalation, priced so the recomputation
// has something nontrivial to verify.
BatchReport run_fixture(const TempDir& out, int runs) {
  const std::string edit = valid_response(
      "Edit Script (AI)",
      R"({"script_name": "solve.py", "edit_instruction": "raise", "save_name": "solve.py"})");
  const std::string fin = valid_response("Final Answer", R"({})");

  json doc = {
      {"models",
       json::array(
           {json{{"id", "base"},
                 {"price_per_input_token", "0.0000005"},
                 {"price_per_output_token", "0.0000015"},
                 {"endpoint",
                  {{"type", "scripted"},
                   {"replies",
                    json::array({kMalformedResponse, kMalformedResponse, kMalformedResponse,
                                 "score = 0.9\nprint(score)\n", fin})},
                   {"chars_per_token", 4}}}},
            json{{"id", "expert"},
                 {"price_per_input_token", "0.00001"},
                 {"price_per_output_token", "0.00003"},
                 {"endpoint", {{"type", "scripted"}, {"replies", json::array({edit})}}}}})},
  };
  const EngineConfig config = parse_engine_config(doc, ".");
  const Runner runner(TaskPackage::load(toy_task_dir()), config.run, config.echo,
                      config.config_hash);
  return runner.run_batch(out.path, runs, 1);
}

}  // namespace

TEST_CASE("report recomputes from raw events and agrees with stored totals") {
  TempDir out("report");
  const BatchReport batch = run_fixture(out, 2);
  CHECK(batch.runs[0].status == RunStatus::Completed);
  CHECK(batch.runs[0].lifelines_used == 1);
  CHECK(batch.runs[0].cost_report.total.micros() > 0);

  const auto files = find_trace_files(out.path);
  REQUIRE(files.size() == 2);
  const Report report = build_report(files);
  REQUIRE(report.runs.size() == 2);
  for (const auto& run : report.runs) {
    INFO(run.run_id);
    for (const auto& m : run.mismatches) INFO(m);
    CHECK(run.consistent);
    CHECK(run.cost == run.stored_cost);
    CHECK(run.format_failures == 3);
    CHECK(run.expert_calls == 0);  // cascade escalation, not an expert request
    CHECK(run.lifelines_used == 1);
  }

  REQUIRE(report.tasks.size() == 1);
  const TaskRollup& rollup = report.tasks[0];
  CHECK(rollup.task_id == "toy-score");
  CHECK(rollup.runs == 2);
  CHECK(rollup.success_pct == doctest::Approx(100.0));
  CHECK(rollup.lifeline_histogram.at(1) == 2);
  CHECK(rollup.total_cost == batch.total_cost);
  CHECK(rollup.average_cost_per_run == batch.average_cost_per_run);
  CHECK(rollup.consistent);

  const std::string table = format_report_table(report);
  CHECK(table.find("toy-score") != std::string::npos);
  CHECK(table.find("retrieval included") != std::string::npos);

  const json j = report_to_json(report);
  CHECK(j["tasks"][0]["runs"] == 2);
}

TEST_CASE("tampered totals are flagged as inconsistent") {
  TempDir out("tamper");
  (void)run_fixture(out, 1);
  const auto files = find_trace_files(out.path);
  REQUIRE(files.size() == 1);

  // bump the stored total by one micro-dollar
  std::string content = read_file(files[0]);
  const auto pos = content.find("\"cost_total_micros\":");
  REQUIRE(pos != std::string::npos);
  const auto digit = content.find_first_of("0123456789", pos + 20);
  content[digit] = content[digit] == '9' ? '8' : static_cast<char>(content[digit] + 1);
  write_file(files[0], content);

  const Report report = build_report(files);
  CHECK_FALSE(report.runs[0].consistent);
  CHECK_FALSE(report.tasks[0].consistent);
  CHECK(format_report_table(report).find("WARNING") != std::string::npos);
}

TEST_CASE("transcript rendering and the step filter") {
  TempDir out("transcript");
  const BatchReport batch = run_fixture(out, 1);
  const RunTrace trace = read_trace(batch.runs[0].trace_path);

  const std::string all = format_transcript(trace);
  CHECK(all.find("== step 0") != std::string::npos);
  CHECK(all.find("== step 1") != std::string::npos);
  CHECK(all.find("format_failure") != std::string::npos);
  CHECK(all.find("== result: Completed") != std::string::npos);

  const std::string only1 = format_transcript(trace, 1);
  CHECK(only1.find("== step 1") != std::string::npos);
  CHECK(only1.find("== step 0") == std::string::npos);
}

TEST_CASE("empty trace sets raise EmptyRunSet") {
  CHECK_THROWS_AS(build_report({}), EmptyRunSet);
}

TEST_CASE("retrieval calls are priced into step records and recomputation") {
  // 5 steps with retrieval enabled: the step-4 prompt triggers one retrieval
  // call (log length 4 > k=3), which must appear in that step's usage slice
  std::vector<std::string> replies;
  for (int i = 0; i < 4; ++i) {
    replies.push_back(valid_response(
        "Inspect Script Lines",
        json{{"script_name", "solve.py"}, {"start_line_number", 1}, {"end_line_number", i + 1}}
            .dump()));
  }
  replies.push_back("retrieved summary");
  replies.push_back(valid_response("Final Answer", R"({})"));

  json doc = {{"models",
               json::array({json{{"id", "base"},
                                 {"price_per_input_token", "0.0000005"},
                                 {"price_per_output_token", "0.0000015"},
                                 {"endpoint",
                                  {{"type", "scripted"},
                                   {"replies", replies},
                                   {"chars_per_token", 4}}}}})}};
  const EngineConfig config = parse_engine_config(doc, ".");
  const Runner runner(TaskPackage::load(toy_task_dir()), config.run, config.echo,
                      config.config_hash);
  TempDir out("retrieval-cost");
  const RunResult result = runner.run_task(out.path / "r", 1);
  CHECK(result.status == RunStatus::Completed);

  const RunTrace trace = read_trace(result.trace_path);
  REQUIRE(trace.steps.size() == 5);
  bool saw_retrieval = false;
  for (const auto& event : trace.steps[4].usage_events) {
    if (event.purpose == Purpose::retrieval) saw_retrieval = true;
  }
  CHECK(saw_retrieval);

  const Report report = build_report({result.trace_path});
  CHECK(report.runs[0].consistent);  // recomputed cost includes the retrieval call
  CHECK(report.runs[0].cost == result.cost_report.total);
}
