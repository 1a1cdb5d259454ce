#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "weir/memory.hpp"
#include "weir/money.hpp"

namespace weir {

// Everything here is recomputed from the raw step records and usage events;
// stored totals are only used to cross-check.
struct RunSummary {
  std::filesystem::path trace;
  std::string run_id;
  std::string task_id;
  std::string status;
  bool success = false;
  Money cost;            // recomputed from usage events x header pricing
  Money stored_cost;     // from the result line
  int step_count = 0;
  int lifelines_used = 0;
  int format_failures = 0;
  int repeat_escalations = 0;
  int expert_calls = 0;
  bool consistent = true;  // recomputed cost/success/lifelines match stored
  std::vector<std::string> mismatches;
};

struct TaskRollup {
  std::string task_id;
  int runs = 0;
  double success_pct = 0.0;
  Money total_cost;
  Money average_cost_per_run;
  int format_failures = 0;
  int repeat_escalations = 0;
  int expert_calls = 0;
  std::map<int, int> lifeline_histogram;  // lifelines_used -> run count
  bool consistent = true;
};

struct Report {
  std::vector<RunSummary> runs;
  std::vector<TaskRollup> tasks;
};

// Trace files under dir (any depth), sorted for determinism.
std::vector<std::filesystem::path> find_trace_files(const std::filesystem::path& dir);

RunSummary summarize_run(const RunTrace& trace);
Report build_report(const std::vector<std::filesystem::path>& trace_files);

std::string format_report_table(const Report& report);
nlohmann::json report_to_json(const Report& report);

// Human-readable transcript of one trace; step < 0 prints every step.
std::string format_transcript(const RunTrace& trace, int step = -1);

}  // namespace weir
