#include "weir/report.hpp"

#include <algorithm>
#include <sstream>

#include "weir/errors.hpp"
#include "weir/ledger.hpp"
#include "weir/orchestrator.hpp"

namespace weir {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<fs::path> find_trace_files(const fs::path& dir) {
  std::vector<fs::path> files;
  std::error_code ec;
  if (fs::is_regular_file(dir)) {
    files.push_back(dir);
    return files;
  }
  for (auto it = fs::recursive_directory_iterator(dir, ec);
       it != fs::recursive_directory_iterator(); it.increment(ec)) {
    if (ec) break;
    if (it->is_regular_file() && it->path().extension() == ".jsonl") {
      files.push_back(it->path());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

RunSummary summarize_run(const RunTrace& trace) {
  RunSummary summary;
  summary.trace = trace.path;
  summary.run_id = trace.header.value("run_id", "");
  summary.task_id = trace.header.value("task_id", "");
  summary.step_count = static_cast<int>(trace.steps.size());

  // pricing from the header, applied to the raw usage events
  PricingTable pricing;
  std::string expert_model;
  int expert_rank = -1;
  if (trace.header.contains("models")) {
    for (const auto& m : trace.header["models"]) {
      ModelDescriptor model;
      model.id = m.value("id", "");
      model.tier_rank = m.value("tier_rank", 0);
      model.price_per_input_token = TokenPrice::parse(m.value("price_per_input_token", "0"));
      model.price_per_output_token = TokenPrice::parse(m.value("price_per_output_token", "0"));
      if (trace.header["models"].size() >= 2 && model.tier_rank > expert_rank) {
        expert_rank = model.tier_rank;
        expert_model = model.id;
      }
      pricing.emplace(model.id, std::move(model));
    }
  }

  std::vector<UsageEvent> events;
  int recomputed_lifelines = 0;
  for (const auto& step : trace.steps) {
    for (const auto& event : step.usage_events) {
      if (!expert_model.empty() && event.model_id == expert_model &&
          (event.purpose == Purpose::planning || event.purpose == Purpose::expert)) {
        ++recomputed_lifelines;
      }
      events.push_back(event);
    }
    for (const auto& attempt : step.escalation_trace) {
      if (attempt.outcome == EscalationAttempt::Outcome::format_failure) {
        ++summary.format_failures;
      }
      if (attempt.outcome == EscalationAttempt::Outcome::repeat_discarded) {
        ++summary.repeat_escalations;
      }
      if (attempt.channel == "expert") ++summary.expert_calls;
    }
  }
  summary.cost = aggregate(events, pricing).total;

  if (trace.result) {
    const json& result = *trace.result;
    summary.status = result.value("status", "");
    summary.lifelines_used = result.value("lifelines_used", 0);
    summary.stored_cost = Money::from_micros(result.value("cost_total_micros", std::int64_t{0}));
    const bool stored_success = result.value("success", false);

    if (summary.stored_cost != summary.cost) {
      summary.consistent = false;
      summary.mismatches.push_back("stored cost " + summary.stored_cost.to_string() +
                                   " != recomputed " + summary.cost.to_string());
    }
    if (summary.lifelines_used != recomputed_lifelines) {
      summary.consistent = false;
      summary.mismatches.push_back(
          "stored lifelines " + std::to_string(summary.lifelines_used) +
          " != expert-tier completions " + std::to_string(recomputed_lifelines));
    }

    // recompute success from the stored score and the header's task block
    bool recomputed_success = false;
    if (result.contains("final_score") && trace.header.contains("task")) {
      const json& task = trace.header["task"];
      const auto final_score = Decimal::parse(result["final_score"].get<std::string>());
      const auto baseline = Decimal::parse(task.value("baseline_score", ""));
      if (final_score && baseline && !baseline->is_zero()) {
        const MetricDirection direction = task.value("metric_direction", "") == "lower_is_better"
                                              ? MetricDirection::lower_is_better
                                              : MetricDirection::higher_is_better;
        const ImprovementMode mode = task.value("improvement_mode", "") == "absolute"
                                         ? ImprovementMode::absolute
                                         : ImprovementMode::relative;
        recomputed_success = evaluate_success(*final_score, *baseline, direction, mode).success;
      }
    }
    summary.success = recomputed_success;
    if (recomputed_success != stored_success) {
      summary.consistent = false;
      summary.mismatches.push_back("stored success flag does not match recomputation");
    }
  } else {
    summary.status = "(no result line)";
    summary.consistent = false;
    summary.mismatches.push_back("trace has no result line (run did not finish?)");
  }
  return summary;
}

Report build_report(const std::vector<fs::path>& trace_files) {
  if (trace_files.empty()) throw EmptyRunSet("no trace files to report on");

  Report report;
  for (const auto& file : trace_files) {
    report.runs.push_back(summarize_run(read_trace(file)));
  }

  std::map<std::string, std::vector<const RunSummary*>> by_task;
  for (const auto& run : report.runs) by_task[run.task_id].push_back(&run);

  for (const auto& [task_id, runs] : by_task) {
    TaskRollup rollup;
    rollup.task_id = task_id;
    rollup.runs = static_cast<int>(runs.size());
    int successes = 0;
    for (const RunSummary* run : runs) {
      if (run->success) ++successes;
      rollup.total_cost += run->cost;
      rollup.format_failures += run->format_failures;
      rollup.repeat_escalations += run->repeat_escalations;
      rollup.expert_calls += run->expert_calls;
      rollup.lifeline_histogram[run->lifelines_used] += 1;
      rollup.consistent = rollup.consistent && run->consistent;
    }
    rollup.success_pct = 100.0 * successes / static_cast<double>(runs.size());
    rollup.average_cost_per_run =
        Money::divide(rollup.total_cost, static_cast<std::int64_t>(runs.size()));
    report.tasks.push_back(std::move(rollup));
  }
  return report;
}

std::string format_report_table(const Report& report) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-20s %5s %9s %12s %11s %10s %10s %8s\n", "task", "runs",
                "success%", "avg $/run", "total $", "fmt-esc", "rep-esc", "expert");
  out << line;
  for (const auto& task : report.tasks) {
    std::snprintf(line, sizeof(line), "%-20s %5d %9.2f %12s %11s %10d %10d %8d\n",
                  task.task_id.c_str(), task.runs, task.success_pct,
                  task.average_cost_per_run.to_string().c_str(),
                  task.total_cost.to_string().c_str(), task.format_failures,
                  task.repeat_escalations, task.expert_calls);
    out << line;
    out << "  lifelines used per run:";
    for (const auto& [used, count] : task.lifeline_histogram) {
      out << " " << used << "x" << count;
    }
    out << "\n";
    if (!task.consistent) {
      out << "  WARNING: stored totals disagree with recomputation\n";
      for (const auto& run : report.runs) {
        if (run.task_id != task.task_id) continue;
        for (const auto& m : run.mismatches) out << "    " << run.run_id << ": " << m << "\n";
      }
    }
  }
  out << "\nCosts are exact per-token sums over every recorded model call, retrieval included.\n"
         "No cross-model token-count approximations (such as scaled Claude estimates) are "
         "applied.\n";
  return out.str();
}

json report_to_json(const Report& report) {
  json runs = json::array();
  for (const auto& run : report.runs) {
    runs.push_back({
        {"trace", run.trace.string()},
        {"run_id", run.run_id},
        {"task_id", run.task_id},
        {"status", run.status},
        {"success", run.success},
        {"cost", run.cost.to_string()},
        {"cost_micros", run.cost.micros()},
        {"step_count", run.step_count},
        {"lifelines_used", run.lifelines_used},
        {"format_failures", run.format_failures},
        {"repeat_escalations", run.repeat_escalations},
        {"expert_calls", run.expert_calls},
        {"consistent", run.consistent},
    });
  }
  json tasks = json::array();
  for (const auto& task : report.tasks) {
    json histogram = json::object();
    for (const auto& [used, count] : task.lifeline_histogram) {
      histogram[std::to_string(used)] = count;
    }
    tasks.push_back({
        {"task_id", task.task_id},
        {"runs", task.runs},
        {"success_rate_pct", task.success_pct},
        {"total_cost", task.total_cost.to_string()},
        {"average_cost_per_run", task.average_cost_per_run.to_string()},
        {"format_failures", task.format_failures},
        {"repeat_escalations", task.repeat_escalations},
        {"expert_calls", task.expert_calls},
        {"lifeline_histogram", std::move(histogram)},
        {"consistent", task.consistent},
    });
  }
  return json{{"runs", std::move(runs)}, {"tasks", std::move(tasks)}};
}

std::string format_transcript(const RunTrace& trace, int step) {
  std::ostringstream out;
  out << "run " << trace.header.value("run_id", "?") << " | task "
      << trace.header.value("task_id", "?") << " | retrieval "
      << (trace.header.value("retrieval_enabled", false) ? "on" : "off") << " | config "
      << trace.header.value("config_hash", "?") << "\n";

  for (const auto& record : trace.steps) {
    if (step >= 0 && record.index != step) continue;
    out << "\n== step " << record.index << ": " << record.action_name << "\n";
    for (const auto& attempt : record.escalation_trace) {
      out << "  [" << attempt.channel << "] tier " << attempt.tier_index << " ("
          << attempt.model_id << ") attempt " << attempt.attempt_no << ": "
          << to_string(attempt.outcome);
      if (!attempt.escalation_reason.empty()) out << " -> " << attempt.escalation_reason;
      if (!attempt.detail.empty()) out << " - " << attempt.detail;
      out << "\n";
    }
    out << serialize_response(record.planner_response);
    out << "Observation";
    if (record.observation.exit_status) {
      out << " (exit " << *record.observation.exit_status << ")";
    }
    if (record.observation.truncated) out << " [truncated]";
    out << ":\n" << record.observation.text << "\n";
  }

  if (trace.result) {
    const json& result = *trace.result;
    out << "\n== result: " << result.value("status", "?")
        << (result.value("success", false) ? " (success)" : " (no success)");
    if (result.contains("final_score")) {
      out << ", final score " << result["final_score"].get<std::string>();
    }
    out << ", steps " << result.value("step_count", 0) << ", cost $"
        << Money::from_micros(result.value("cost_total_micros", std::int64_t{0})).to_string()
        << ", lifelines " << result.value("lifelines_used", 0) << "\n";
    if (result.contains("error")) {
      out << "   error: " << result["error"].get<std::string>() << "\n";
    }
  }
  return out.str();
}

}  // namespace weir
