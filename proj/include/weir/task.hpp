#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "weir/money.hpp"

namespace weir {

enum class MetricDirection { higher_is_better, lower_is_better };
enum class ImprovementMode { relative, absolute };

std::string_view to_string(MetricDirection d);
std::string_view to_string(ImprovementMode m);

// A runnable benchmark task: description, seed workspace, evaluator command
// and baseline. Loaded from a directory holding manifest.json, a description
// file and a workspace/ seed directory.
struct TaskPackage {
  std::string id;
  std::string description_text;
  std::filesystem::path seed_workspace;
  std::vector<std::string> evaluator_command;  // run with cwd = final workspace
  Decimal baseline_score;
  std::string baseline_score_text;  // exact decimal text, echoed into traces
  MetricDirection metric_direction = MetricDirection::higher_is_better;
  ImprovementMode improvement_mode = ImprovementMode::relative;
  std::string interpreter_command = "python3";
  int execute_timeout_s = 900;

  static TaskPackage load(const std::filesystem::path& dir);  // throws TaskPackageInvalid
};

// Non-throwing validation; empty result means the package is valid. With
// evaluator_dry_run the evaluator runs once on a scratch copy of the seed
// workspace and must produce a numeric score.
std::vector<std::string> validate_task_dir(const std::filesystem::path& dir,
                                           bool evaluator_dry_run);

struct EvalOutcome {
  std::optional<Decimal> score;  // parsed from the last stdout line
  std::string error;
  std::string raw_output;
};

// Runs the task's evaluator over a workspace. Deterministic given the
// workspace; never throws on evaluator misbehavior (reported via error).
EvalOutcome run_evaluator(const TaskPackage& task, const std::filesystem::path& workspace_dir);

}  // namespace weir
