#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "support.hpp"
#include "weir/grammar.hpp"
#include "weir/prompt.hpp"

using namespace weir;
using namespace weir::testing;

namespace {

const std::set<std::string> kActions = {"Execute Script", "List Files", "Final Answer"};

const char* kFixture =
    "Reflection: The script failed with a missing import.\n"
    "Research Plan and Status: 1) fix imports 2) rerun.\n"
    "Fact Check: the failure was directly observed.\n"
    "Thought: run the training script again.\n"
    "Action: Execute Script\n"
    "Action Input: {\"script_name\": \"train.py\"}\n";

}  // namespace

TEST_CASE("parses the canonical six-section fixture") {
  const ParseResult result = parse_planner_response(kFixture, kActions);
  REQUIRE(std::holds_alternative<PlannerResponse>(result));
  const auto& r = std::get<PlannerResponse>(result);
  CHECK(r.reflection == "The script failed with a missing import.");
  CHECK(r.plan_and_status == "1) fix imports 2) rerun.");
  CHECK(r.fact_check == "the failure was directly observed.");
  CHECK(r.thought == "run the training script again.");
  CHECK(r.action_name == "Execute Script");
  CHECK(r.action_input == nlohmann::json({{"script_name", "train.py"}}));
}

TEST_CASE("classified failures") {
  // missing Action Input section
  std::string no_input =
      "Reflection: a\nResearch Plan and Status: b\nFact Check: c\nThought: d\n"
      "Action: Execute Script\n";
  auto r1 = parse_planner_response(no_input, kActions);
  REQUIRE(std::holds_alternative<ParseFailure>(r1));
  CHECK(std::get<ParseFailure>(r1).kind == ParseFailure::Kind::MissingSection);
  CHECK(std::get<ParseFailure>(r1).detail.find("Action Input") != std::string::npos);

  // unknown action
  std::string rocket(kFixture);
  const auto pos = rocket.find("Execute Script");
  rocket.replace(pos, std::string("Execute Script").size(), "Launch Rocket");
  auto r2 = parse_planner_response(rocket, kActions);
  REQUIRE(std::holds_alternative<ParseFailure>(r2));
  CHECK(std::get<ParseFailure>(r2).kind == ParseFailure::Kind::UnknownAction);

  // whitespace only
  auto r3 = parse_planner_response("  \n\t \n", kActions);
  REQUIRE(std::holds_alternative<ParseFailure>(r3));
  CHECK(std::get<ParseFailure>(r3).kind == ParseFailure::Kind::EmptyResponse);

  // broken JSON
  std::string bad =
      "Reflection: a\nResearch Plan and Status: b\nFact Check: c\nThought: d\n"
      "Action: Execute Script\nAction Input: {\"script_name\": }\n";
  auto r4 = parse_planner_response(bad, kActions);
  REQUIRE(std::holds_alternative<ParseFailure>(r4));
  CHECK(std::get<ParseFailure>(r4).kind == ParseFailure::Kind::MalformedActionInput);

  // empty action name
  std::string blank =
      "Reflection: a\nResearch Plan and Status: b\nFact Check: c\nThought: d\n"
      "Action:\nAction Input: {}\n";
  auto r5 = parse_planner_response(blank, kActions);
  REQUIRE(std::holds_alternative<ParseFailure>(r5));
  CHECK(std::get<ParseFailure>(r5).kind == ParseFailure::Kind::MissingSection);
}

TEST_CASE("headers are case-insensitive, order-free, last-occurrence-wins") {
  const std::string lower =
      "reflection: The script failed with a missing import.\n"
      "research plan and status: 1) fix imports 2) rerun.\n"
      "FACT CHECK: the failure was directly observed.\n"
      "thought: run the training script again.\n"
      "action: Execute Script\n"
      "ACTION INPUT: {\"script_name\": \"train.py\"}\n";
  auto a = parse_planner_response(kFixture, kActions);
  auto b = parse_planner_response(lower, kActions);
  REQUIRE(std::holds_alternative<PlannerResponse>(b));
  CHECK(std::get<PlannerResponse>(a) == std::get<PlannerResponse>(b));

  // shuffled section order parses to the same value
  const std::string shuffled =
      "Action: Execute Script\n"
      "Action Input: {\"script_name\": \"train.py\"}\n"
      "Thought: run the training script again.\n"
      "Reflection: The script failed with a missing import.\n"
      "Fact Check: the failure was directly observed.\n"
      "Research Plan and Status: 1) fix imports 2) rerun.\n";
  auto c = parse_planner_response(shuffled, kActions);
  REQUIRE(std::holds_alternative<PlannerResponse>(c));
  CHECK(std::get<PlannerResponse>(a) == std::get<PlannerResponse>(c));

  // models sometimes restate the action: the final statement wins
  const std::string restated = std::string(kFixture) +
                               "Action: List Files\nAction Input: {\"dir_path\": \".\"}\n";
  auto d = parse_planner_response(restated, kActions);
  REQUIRE(std::holds_alternative<PlannerResponse>(d));
  CHECK(std::get<PlannerResponse>(d).action_name == "List Files");
}

TEST_CASE("action input takes the first balanced object and ignores trailing prose") {
  const std::string chatty =
      "Reflection: a\nResearch Plan and Status: b\nFact Check: c\nThought: d\n"
      "Action: Execute Script\n"
      "Action Input: {\"script_name\": \"a}b.py\", \"note\": \"{nested} ok\"}\n"
      "I hope this helps! Let me know if { anything } else.\n";
  auto r = parse_planner_response(chatty, kActions);
  REQUIRE(std::holds_alternative<PlannerResponse>(r));
  CHECK(std::get<PlannerResponse>(r).action_input.at("script_name") == "a}b.py");
}

TEST_CASE("round-trip: serialize then parse yields the same value") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> len(0, 40);
  std::uniform_int_distribution<int> ch('a', 'z');
  auto word = [&] {
    std::string s;
    const int n = len(rng);
    for (int i = 0; i < n; ++i) s += static_cast<char>(ch(rng));
    return s;
  };

  for (int i = 0; i < 100; ++i) {
    PlannerResponse r;
    r.reflection = word();
    r.plan_and_status = word();
    r.fact_check = word();
    r.thought = word();
    r.action_name = "Execute Script";
    r.action_input = {{"script_name", word()}, {"n", i}};
    const auto parsed = parse_planner_response(serialize_response(r), kActions);
    REQUIRE(std::holds_alternative<PlannerResponse>(parsed));
    CHECK(std::get<PlannerResponse>(parsed) == r);
  }
}

TEST_CASE("totality: arbitrary bytes never crash the parser") {
  std::mt19937 rng(20240402);
  std::uniform_int_distribution<int> len(0, 300);
  std::uniform_int_distribution<int> byte(0, 255);
  for (int i = 0; i < 2000; ++i) {
    std::string text;
    const int n = len(rng);
    for (int j = 0; j < n; ++j) text += static_cast<char>(byte(rng));
    const auto r = parse_planner_response(text, kActions);
    CHECK((std::holds_alternative<PlannerResponse>(r) ||
           std::holds_alternative<ParseFailure>(r)));
  }
}

TEST_CASE("canonical input sorts keys and normalizes whitespace") {
  const auto a = nlohmann::json::parse(R"({"b": 1,   "a": {"y": 2, "x": 3}})");
  const auto b = nlohmann::json::parse(R"({"a":{"x":3,"y":2},"b":1})");
  CHECK(canonical_input(a) == canonical_input(b));
  CHECK(canonical_input(a) == R"({"a":{"x":3,"y":2},"b":1})");
}

TEST_CASE("prompt renders the fixed section order") {
  const auto& actions = base_action_specs();
  RetrievedContext retrieved;
  retrieved.summary = "earlier steps tried train.py";
  retrieved.from_step = 0;
  retrieved.to_step = 4;
  retrieved.produced_by = "m";

  const std::string prompt =
      render_planner_prompt("Improve the model.", actions, {}, retrieved);

  const auto p_desc = prompt.find("Improve the model.");
  const auto p_actions = prompt.find("- Name: List Files");
  const auto p_retrieved = prompt.find("earlier steps tried train.py");
  const auto p_steps = prompt.find("No steps taken yet.");
  const auto p_format = prompt.find("Respond with exactly the following sections");
  REQUIRE(p_desc != std::string::npos);
  REQUIRE(p_actions != std::string::npos);
  REQUIRE(p_retrieved != std::string::npos);
  REQUIRE(p_steps != std::string::npos);
  REQUIRE(p_format != std::string::npos);
  CHECK(p_desc < p_actions);
  CHECK(p_actions < p_retrieved);
  CHECK(p_retrieved < p_steps);
  CHECK(p_steps < p_format);

  // every action's documentation fields are present
  for (const auto& action : actions) {
    CHECK(prompt.find("- Name: " + action.name) != std::string::npos);
  }
  CHECK(prompt.find("Description:") != std::string::npos);
  CHECK(prompt.find("Usage:") != std::string::npos);
  CHECK(prompt.find("Returns:") != std::string::npos);
}

TEST_CASE("retrieval-disabled prompt is byte-identical except the context block") {
  const auto& actions = base_action_specs();
  RetrievedContext enabled;
  enabled.summary = "summary of steps 0-6";
  enabled.from_step = 0;
  enabled.to_step = 6;
  enabled.produced_by = "m";
  const RetrievedContext disabled;  // empty -> block omitted entirely

  const std::string with = render_planner_prompt("task", actions, {}, enabled);
  const std::string without = render_planner_prompt("task", actions, {}, disabled);

  const std::string block = retrieved_block(enabled);
  REQUIRE_FALSE(block.empty());
  const auto at = with.find(block);
  REQUIRE(at != std::string::npos);
  std::string stripped = with;
  stripped.erase(at, block.size());
  CHECK(stripped == without);  // string-diff oracle
}
