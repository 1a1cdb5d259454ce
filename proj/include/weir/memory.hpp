#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "weir/actions.hpp"
#include "weir/cascade.hpp"
#include "weir/gateway.hpp"
#include "weir/grammar.hpp"
#include "weir/usage.hpp"

namespace weir {

// One completed step. Immutable once appended.
struct StepRecord {
  int index = 0;
  PlannerResponse planner_response;  // the accepted response that drove the action
  std::vector<EscalationAttempt> escalation_trace;
  std::string action_name;
  nlohmann::json action_input = nlohmann::json::object();
  Observation observation;
  std::vector<std::int64_t> usage_event_ids;
  std::vector<UsageEvent> usage_events;  // embedded so traces are self-contained
};

nlohmann::json step_to_json(const StepRecord& record);
StepRecord step_from_json(const nlohmann::json& j);  // throws Error on malformed input

// Append-only per-run history.
class ResearchLog {
 public:
  ResearchLog() : header_(nlohmann::json::object()) {}
  explicit ResearchLog(nlohmann::json header) : header_(std::move(header)) {}

  const nlohmann::json& header() const { return header_; }
  const std::vector<StepRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

  // record.index must equal the current length; throws IndexGap otherwise.
  void append_step(StepRecord record);

  // Last min(k, size) records in order.
  std::span<const StepRecord> recent_window(int k) const;

 private:
  nlohmann::json header_;
  std::vector<StepRecord> records_;
};

// Serialized step summaries ("Step N:", response, observation) used for the
// prompt recency block and as retrieval input.
std::string summarize_steps(std::span<const StepRecord> steps);

// Line-delimited JSON trace: header line, one line per step, a final result
// line. Every line is flushed as written so a crash loses at most the
// in-flight step.
class TraceWriter {
 public:
  TraceWriter(std::filesystem::path file, const nlohmann::json& header);

  void append(const StepRecord& record);
  void finalize(const nlohmann::json& result);
  const std::filesystem::path& path() const { return path_; }

 private:
  void write_line(const std::string& line);
  std::filesystem::path path_;
  std::ofstream out_;
};

struct RunTrace {
  nlohmann::json header;
  std::vector<StepRecord> steps;
  std::optional<nlohmann::json> result;
  std::filesystem::path path;
};

RunTrace read_trace(const std::filesystem::path& file);  // throws TraceCorrupt

inline constexpr int kTraceFormatVersion = 1;

// -- retrieval ----------------------------------------------------------------

struct RetrievedContext {
  std::string summary;
  int from_step = 0;
  int to_step = -1;  // inclusive; empty range when to_step < from_step
  std::string produced_by = "disabled";
  std::string error;  // set when the retrieval call failed (best-effort)

  bool empty() const { return summary.empty(); }
};

struct RetrievalParams {
  std::size_t max_chars = 60000;  // clip on the serialized history
  double temperature = 0.01;
  int max_output_tokens = 4096;
};

// Summarizes log entries older than the recency window with respect to the
// current plan. Zero model calls when disabled, when the log is empty, or
// when nothing is older than the window; gateway failures degrade to an
// empty context with an error marker.
RetrievedContext retrieve(const ResearchLog& log, const std::string& current_plan, bool enabled,
                          int short_term_k, Gateway& gateway, const ModelDescriptor& worker,
                          const RetrievalParams& params, const std::string& run_id,
                          int step_index);

}  // namespace weir
