#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace weir {

// Agent profiles, byte-exact as shipped configuration.
inline constexpr std::string_view kPlannerProfile =
    "You are a planner for solving machine learning tasks.";
inline constexpr std::string_view kExpertProfile =
    "You are an expert in planning for solving machine learning tasks.";
inline constexpr std::string_view kUnderstandFileProfile =
    "You are an expert in understanding files containing both code and natural language.";
inline constexpr std::string_view kEditScriptProfile = "You are an expert in editing code files.";
inline constexpr std::string_view kReflectionProfile =
    "You are an expert in reflecting on previous actions when solving a machine learning task.";

inline constexpr std::string_view kExpertActionName = "Request Help from a Planning Expert";
inline constexpr std::string_view kFinalAnswerActionName = "Final Answer";

enum class ActionKind { low_level, high_level };

enum class ArgType { string, integer, number, boolean };

struct ArgSpec {
  std::string name;
  ArgType type = ArgType::string;
  bool required = true;
  std::string doc;
};

// Documentation and input contract for one registered action.
struct ActionSpec {
  std::string name;
  std::string description;
  std::string usage;    // argument documentation, rendered into prompts
  std::string returns;  // expected return values, rendered into prompts
  ActionKind kind = ActionKind::low_level;
  std::string profile;  // system prompt for model-backed actions; empty otherwise
  std::vector<ArgSpec> input_schema;
};

struct Observation {
  std::string text;
  bool truncated = false;
  std::string source_action;
  std::optional<int> exit_status;  // execute only

  static Observation make(std::string source_action, std::string text,
                          std::size_t cap = kDefaultTruncationCap);

  static constexpr std::size_t kDefaultTruncationCap = 5000;
};

// Head+tail clip with an elision marker; result length never exceeds cap.
std::string truncate_middle(const std::string& text, std::size_t cap, bool* clipped = nullptr);

// Validates against the schema: required args present, types coercible.
// Unknown keys are tolerated. Returns a violation message or nothing.
std::optional<std::string> validate_input(const ActionSpec& spec, const nlohmann::json& input);

// Coercing accessors for validated inputs.
std::string arg_string(const nlohmann::json& input, const std::string& name,
                       const std::string& fallback = "");
long arg_int(const nlohmann::json& input, const std::string& name, long fallback = 0);
bool arg_bool(const nlohmann::json& input, const std::string& name, bool fallback = false);

// The registered environment actions, in prompt order. The expert action is
// not part of the base registry; the cascade appends it while lifelines last.
const std::vector<ActionSpec>& base_action_specs();
const ActionSpec& expert_action_spec();

const ActionSpec* find_action(const std::vector<ActionSpec>& specs, std::string_view name);

}  // namespace weir
