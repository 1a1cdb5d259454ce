#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "weir/cascade.hpp"
#include "weir/ledger.hpp"
#include "weir/memory.hpp"
#include "weir/task.hpp"

namespace weir {

struct RunConfig {
  int max_actions = 30;
  int short_term_k = 3;
  bool retrieval_enabled = true;
  CascadeConfig cascade;
  double planning_temperature = 0.2;
  double worker_temperature = 0.01;
  int max_output_tokens = 4096;
  std::vector<std::string> stop_sequences;
  std::size_t truncation_cap = Observation::kDefaultTruncationCap;
  std::size_t understand_chunk_chars = 20000;
  std::size_t retrieval_max_chars = 60000;
  std::string seed_label = "default";
  std::vector<std::string> scrub_env;  // credential env vars kept from subprocesses
  bool deterministic = false;          // fixed clock; set when every tier is scripted
};

enum class RunStatus { Completed, MaxActionsReached, CascadeExhausted, EnvFatal };
std::string_view to_string(RunStatus status);

struct RunResult {
  RunStatus status = RunStatus::EnvFatal;
  std::optional<Decimal> final_score;
  std::optional<double> improvement_fraction;
  bool success = false;
  int step_count = 0;
  CostReport cost_report;
  std::filesystem::path trace_path;
  std::string run_id;
  int lifelines_used = 0;
  std::string error;
};

struct Improvement {
  double fraction = 0.0;
  bool success = false;
};

// Success iff the improvement over the baseline strictly exceeds 10%,
// decided with exact decimal arithmetic. Throws BaselineDegenerate when the
// baseline is zero.
Improvement evaluate_success(const Decimal& final_score, const Decimal& baseline,
                             MetricDirection direction,
                             ImprovementMode mode = ImprovementMode::relative);
Improvement evaluate_success(double final_score, double baseline, MetricDirection direction,
                             ImprovementMode mode = ImprovementMode::relative);

// Percentage of successful runs. Throws EmptyRunSet.
double success_rate(std::span<const RunResult> results);

struct BatchReport {
  std::string task_id;
  int n_runs = 0;
  double success_rate_pct = 0.0;
  Money total_cost;
  Money average_cost_per_run;
  std::map<std::string, Money> cost_by_model;
  std::map<Purpose, Money> cost_by_purpose;
  std::vector<RunResult> runs;
};

struct RunHooks {
  std::function<void(int step, const std::string& prompt)> on_prompt;
  std::function<void(const StepRecord& record)> on_step;
};

using BackendFactory = std::function<std::unique_ptr<Backend>(const ModelDescriptor&)>;

// Builds per-run backends from a model's endpoint binding.
std::unique_ptr<Backend> make_default_backend(const ModelDescriptor& model);

// The top-level loop: plan (cascade) -> dispatch -> observe -> log, with
// termination, evaluation and batch assembly. One Runner serves many runs;
// every run gets its own workspace copy, ledger, backends and state.
class Runner {
 public:
  Runner(TaskPackage task, RunConfig config, nlohmann::json config_echo,
         std::string config_hash, BackendFactory factory = make_default_backend);

  RunResult run_task(const std::filesystem::path& run_dir, int run_index,
                     const RunHooks& hooks = {}) const;

  BatchReport run_batch(const std::filesystem::path& out_dir, int n_runs, int parallelism,
                        const RunHooks& hooks = {}) const;

  const TaskPackage& task() const { return task_; }
  const RunConfig& config() const { return config_; }
  const PricingTable& pricing() const { return pricing_; }

 private:
  nlohmann::json build_header(const std::string& run_id) const;

  TaskPackage task_;
  RunConfig config_;
  nlohmann::json config_echo_;
  std::string config_hash_;
  BackendFactory factory_;
  PricingTable pricing_;
};

nlohmann::json batch_report_to_json(const BatchReport& report);

}  // namespace weir
