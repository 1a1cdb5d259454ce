#include "weir/task.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "weir/errors.hpp"
#include "weir/process.hpp"

namespace weir {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(MetricDirection d) {
  return d == MetricDirection::higher_is_better ? "higher_is_better" : "lower_is_better";
}

std::string_view to_string(ImprovementMode m) {
  return m == ImprovementMode::relative ? "relative" : "absolute";
}

namespace {

std::string read_text_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in.is_open()) throw Error("cannot open '" + file.string() + "'");
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// Shared by load() and validate_task_dir(): fills the package, appends
// diagnostics for everything wrong.
TaskPackage parse_task_dir(const fs::path& dir, std::vector<std::string>& diagnostics) {
  TaskPackage task;
  const fs::path manifest_path = dir / "manifest.json";
  if (!fs::is_regular_file(manifest_path)) {
    diagnostics.push_back("manifest.json not found in " + dir.string());
    return task;
  }

  json manifest = json::parse(read_text_file(manifest_path), nullptr, false);
  if (manifest.is_discarded() || !manifest.is_object()) {
    diagnostics.push_back("manifest.json is not a JSON object");
    return task;
  }

  if (manifest.contains("id") && manifest["id"].is_string()) {
    task.id = manifest["id"].get<std::string>();
  } else {
    diagnostics.push_back("manifest field 'id' (string) is missing");
  }

  if (!manifest.contains("baseline_score")) {
    diagnostics.push_back("manifest field 'baseline_score' is missing");
  } else {
    const auto& b = manifest["baseline_score"];
    std::optional<Decimal> parsed;
    if (b.is_string()) {
      parsed = Decimal::parse(b.get<std::string>());
      task.baseline_score_text = b.get<std::string>();
    } else if (b.is_number()) {
      parsed = Decimal::from_double(b.get<double>());
      task.baseline_score_text = parsed->to_string();
    }
    if (!parsed) {
      diagnostics.push_back("manifest field 'baseline_score' is not a finite decimal");
    } else if (parsed->is_zero()) {
      diagnostics.push_back(
          "manifest field 'baseline_score' is zero; relative improvement is undefined");
    } else {
      task.baseline_score = *parsed;
    }
  }

  const std::string direction = manifest.value("metric_direction", "");
  if (direction == "higher_is_better") {
    task.metric_direction = MetricDirection::higher_is_better;
  } else if (direction == "lower_is_better") {
    task.metric_direction = MetricDirection::lower_is_better;
  } else {
    diagnostics.push_back(
        "manifest field 'metric_direction' must be 'higher_is_better' or 'lower_is_better'");
  }

  const std::string mode = manifest.value("improvement_mode", "relative");
  if (mode == "relative") {
    task.improvement_mode = ImprovementMode::relative;
  } else if (mode == "absolute") {
    task.improvement_mode = ImprovementMode::absolute;
  } else {
    diagnostics.push_back("manifest field 'improvement_mode' must be 'relative' or 'absolute'");
  }

  task.interpreter_command = manifest.value("interpreter_command", "python3");
  if (split_command(task.interpreter_command).empty()) {
    diagnostics.push_back("manifest field 'interpreter_command' is empty");
  }

  task.execute_timeout_s = manifest.value("execute_timeout_s", 900);
  if (task.execute_timeout_s < 1) {
    diagnostics.push_back("manifest field 'execute_timeout_s' must be positive");
  }

  if (manifest.contains("evaluator") && manifest["evaluator"].is_array() &&
      !manifest["evaluator"].empty()) {
    for (const auto& part : manifest["evaluator"]) {
      if (part.is_string()) task.evaluator_command.push_back(part.get<std::string>());
    }
  }
  if (task.evaluator_command.empty()) {
    diagnostics.push_back("manifest field 'evaluator' (non-empty array of strings) is missing");
  }

  const fs::path description =
      dir / manifest.value("description_file", std::string("description.txt"));
  if (fs::is_regular_file(description)) {
    task.description_text = read_text_file(description);
  } else {
    diagnostics.push_back("description file not found: " + description.string());
  }

  task.seed_workspace = dir / manifest.value("workspace_dir", std::string("workspace"));
  if (!fs::is_directory(task.seed_workspace)) {
    diagnostics.push_back("seed workspace directory not found: " + task.seed_workspace.string());
  }
  return task;
}

}  // namespace

TaskPackage TaskPackage::load(const fs::path& dir) {
  std::vector<std::string> diagnostics;
  TaskPackage task = parse_task_dir(dir, diagnostics);
  if (!diagnostics.empty()) throw TaskPackageInvalid(std::move(diagnostics));
  return task;
}

std::vector<std::string> validate_task_dir(const fs::path& dir, bool evaluator_dry_run) {
  std::vector<std::string> diagnostics;
  TaskPackage task = parse_task_dir(dir, diagnostics);
  if (!diagnostics.empty() || !evaluator_dry_run) return diagnostics;

  const fs::path scratch =
      fs::temp_directory_path() / ("weir-validate-" + std::to_string(::getpid()) + "-" + task.id);
  std::error_code ec;
  fs::remove_all(scratch, ec);
  fs::create_directories(scratch, ec);
  fs::copy(task.seed_workspace, scratch, fs::copy_options::recursive, ec);
  if (ec) {
    diagnostics.push_back("cannot copy seed workspace for evaluator dry run: " + ec.message());
    return diagnostics;
  }
  const EvalOutcome outcome = run_evaluator(task, scratch);
  if (!outcome.score) {
    diagnostics.push_back("evaluator dry run failed: " + outcome.error);
  }
  fs::remove_all(scratch, ec);
  return diagnostics;
}

EvalOutcome run_evaluator(const TaskPackage& task, const fs::path& workspace_dir) {
  EvalOutcome outcome;

  ExecSpec spec;
  spec.argv = task.evaluator_command;
  spec.workdir = workspace_dir;
  spec.timeout_s = task.execute_timeout_s;

  ExecResult result;
  try {
    result = run_process(spec);
  } catch (const EnvError& e) {
    outcome.error = e.what();
    return outcome;
  }
  outcome.raw_output = result.output;

  if (result.timed_out) {
    outcome.error = "evaluator timed out";
    return outcome;
  }
  if (result.exit_status.value_or(-1) != 0) {
    outcome.error =
        "evaluator exited with status " + std::to_string(result.exit_status.value_or(-1));
    return outcome;
  }

  // score = last non-empty stdout line, as a decimal
  std::string_view text = outcome.raw_output;
  while (!text.empty()) {
    std::size_t cut = text.find_last_of('\n');
    std::string_view line =
        cut == std::string_view::npos ? text : text.substr(cut + 1);
    std::size_t b = line.find_first_not_of(" \t\r");
    if (b != std::string_view::npos) {
      std::size_t e = line.find_last_not_of(" \t\r");
      if (auto parsed = Decimal::parse(line.substr(b, e - b + 1))) {
        outcome.score = *parsed;
      } else {
        outcome.error = "evaluator's last output line is not a number: '" +
                        std::string(line.substr(b, e - b + 1)) + "'";
      }
      return outcome;
    }
    if (cut == std::string_view::npos) break;
    text = text.substr(0, cut);
  }
  outcome.error = "evaluator produced no output";
  return outcome;
}

}  // namespace weir
