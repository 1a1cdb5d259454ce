#pragma once

#include <set>
#include <string>
#include <string_view>
#include <variant>

#include <nlohmann/json.hpp>

namespace weir {

// The six canonical section headers, in rendering order.
inline constexpr std::string_view kHeaderReflection = "Reflection:";
inline constexpr std::string_view kHeaderPlanStatus = "Research Plan and Status:";
inline constexpr std::string_view kHeaderFactCheck = "Fact Check:";
inline constexpr std::string_view kHeaderThought = "Thought:";
inline constexpr std::string_view kHeaderAction = "Action:";
inline constexpr std::string_view kHeaderActionInput = "Action Input:";

// Parsed structured planner output.
struct PlannerResponse {
  std::string reflection;
  std::string plan_and_status;
  std::string fact_check;
  std::string thought;
  std::string action_name;
  nlohmann::json action_input = nlohmann::json::object();

  friend bool operator==(const PlannerResponse&, const PlannerResponse&) = default;
};

// Every kind counts as a format failure for cascade protocol (i).
struct ParseFailure {
  enum class Kind { MissingSection, MalformedActionInput, UnknownAction, EmptyResponse };
  Kind kind = Kind::EmptyResponse;
  std::string detail;
  std::string offending_text;
};

std::string_view to_string(ParseFailure::Kind kind);

using ParseResult = std::variant<PlannerResponse, ParseFailure>;

// Total over arbitrary byte strings. Headers match case-insensitively at line
// start in any order; the last occurrence of a duplicated header wins; the
// action input is the first balanced {...} block after the Action Input
// header, trailing commentary ignored.
ParseResult parse_planner_response(std::string_view text,
                                   const std::set<std::string>& allowed_actions);

// Canonical section order; parse(serialize(r)) == r for any valid response
// whose fields carry no leading/trailing whitespace or header-shaped lines.
std::string serialize_response(const PlannerResponse& response);

// Sorted keys, compact whitespace. Action equality for repeat detection is
// (name, canonical_input).
std::string canonical_input(const nlohmann::json& input);

}  // namespace weir
