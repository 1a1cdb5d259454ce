#include "weir/orchestrator.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <thread>

#include "weir/environment.hpp"
#include "weir/errors.hpp"
#include "weir/prompt.hpp"
#include "weir/workspace.hpp"

namespace weir {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::Completed: return "Completed";
    case RunStatus::MaxActionsReached: return "MaxActionsReached";
    case RunStatus::CascadeExhausted: return "CascadeExhausted";
    case RunStatus::EnvFatal: return "EnvFatal";
  }
  return "EnvFatal";
}

namespace {

// 10 * |delta| compared against the right-hand side, exactly. Falls back to
// long double when the exponent spread would overflow 128-bit intermediates
// (unreachable for realistic scores).
bool strictly_improves(const Decimal& delta_num, const Decimal& threshold_den) {
  const int spread = std::abs(delta_num.exponent - threshold_den.exponent);
  if (spread > 18) {
    return static_cast<long double>(delta_num.to_double()) * 10.0L >
           static_cast<long double>(threshold_den.to_double());
  }
  const int common = std::min(delta_num.exponent, threshold_den.exponent);
  __int128 lhs = delta_num.mantissa;
  for (int e = delta_num.exponent; e > common; --e) lhs *= 10;
  __int128 rhs = threshold_den.mantissa;
  for (int e = threshold_den.exponent; e > common; --e) rhs *= 10;
  return lhs * 10 > rhs;
}

// exact f - b as a Decimal (mantissas aligned; may saturate exponents only on
// absurd inputs, where the double fallback above takes over anyway)
Decimal decimal_sub(const Decimal& a, const Decimal& b) {
  const int common = std::min(a.exponent, b.exponent);
  const int spread = std::max(a.exponent, b.exponent) - common;
  if (spread > 18) {
    return Decimal::from_double(a.to_double() - b.to_double());
  }
  __int128 ma = a.mantissa;
  for (int e = a.exponent; e > common; --e) ma *= 10;
  __int128 mb = b.mantissa;
  for (int e = b.exponent; e > common; --e) mb *= 10;
  __int128 diff = ma - mb;
  int exponent = common;
  while (diff != 0 && diff % 10 == 0) {
    diff /= 10;
    ++exponent;
  }
  while (diff > INT64_MAX || diff < INT64_MIN) {
    diff /= 10;
    ++exponent;
  }
  return Decimal{static_cast<std::int64_t>(diff), diff == 0 ? 0 : exponent};
}

}  // namespace

Improvement evaluate_success(const Decimal& final_score, const Decimal& baseline,
                             MetricDirection direction, ImprovementMode mode) {
  if (baseline.is_zero()) {
    throw BaselineDegenerate("baseline score is zero; improvement is undefined");
  }

  const Decimal delta = direction == MetricDirection::higher_is_better
                            ? decimal_sub(final_score, baseline)
                            : decimal_sub(baseline, final_score);

  Improvement improvement;
  if (mode == ImprovementMode::relative) {
    const Decimal abs_baseline{std::abs(baseline.mantissa), baseline.exponent};
    improvement.success = strictly_improves(delta, abs_baseline);
    improvement.fraction = delta.to_double() / std::abs(baseline.to_double());
  } else {
    improvement.success = strictly_improves(delta, Decimal{1, 0});
    improvement.fraction = delta.to_double();
  }
  return improvement;
}

Improvement evaluate_success(double final_score, double baseline, MetricDirection direction,
                             ImprovementMode mode) {
  return evaluate_success(Decimal::from_double(final_score), Decimal::from_double(baseline),
                          direction, mode);
}

double success_rate(std::span<const RunResult> results) {
  if (results.empty()) throw EmptyRunSet("success rate over zero runs");
  std::size_t successes = 0;
  for (const auto& r : results) {
    if (r.success) ++successes;
  }
  return 100.0 * static_cast<double>(successes) / static_cast<double>(results.size());
}

std::unique_ptr<Backend> make_default_backend(const ModelDescriptor& model) {
  if (const auto* scripted = std::get_if<ScriptedEndpoint>(&model.endpoint)) {
    return std::make_unique<ScriptedBackend>(*scripted);
  }
  return std::make_unique<HttpBackend>(std::get<RemoteEndpoint>(model.endpoint));
}

Runner::Runner(TaskPackage task, RunConfig config, json config_echo, std::string config_hash,
               BackendFactory factory)
    : task_(std::move(task)),
      config_(std::move(config)),
      config_echo_(std::move(config_echo)),
      config_hash_(std::move(config_hash)),
      factory_(std::move(factory)) {
  config_.cascade.validate();
  for (const auto& tier : config_.cascade.tiers) pricing_.emplace(tier.id, tier);
}

json Runner::build_header(const std::string& run_id) const {
  json models = json::array();
  for (const auto& tier : config_.cascade.tiers) {
    models.push_back({
        {"id", tier.id},
        {"tier_rank", tier.tier_rank},
        {"price_per_input_token", tier.price_per_input_token.to_string()},
        {"price_per_output_token", tier.price_per_output_token.to_string()},
        {"max_format_retries", tier.max_format_retries},
        {"endpoint_kind", tier.is_scripted() ? "scripted" : "remote"},
    });
  }

  const std::int64_t started_at_ms =
      config_.deterministic
          ? 0
          : std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::system_clock::now().time_since_epoch())
                .count();

  return json{
      {"type", "header"},
      {"version", kTraceFormatVersion},
      {"run_id", run_id},
      {"task_id", task_.id},
      {"config_hash", config_hash_},
      {"retrieval_enabled", config_.retrieval_enabled},
      {"max_actions", config_.max_actions},
      {"short_term_k", config_.short_term_k},
      {"repeat_threshold", config_.cascade.repeat_threshold},
      {"lifeline_cap", config_.cascade.lifeline_cap},
      {"planning_temperature", config_.planning_temperature},
      {"worker_temperature", config_.worker_temperature},
      {"prompt_template_version", std::string(kPromptTemplateVersion)},
      {"seed_label", config_.seed_label},
      {"started_at_ms", started_at_ms},
      {"task",
       {{"id", task_.id},
        {"baseline_score", task_.baseline_score_text},
        {"metric_direction", std::string(to_string(task_.metric_direction))},
        {"improvement_mode", std::string(to_string(task_.improvement_mode))}}},
      {"models", std::move(models)},
      {"config", config_echo_},
  };
}

namespace {

ResponseValidator make_validator(std::vector<ActionSpec> actions) {
  std::set<std::string> allowed;
  for (const auto& a : actions) allowed.insert(a.name);
  return [actions = std::move(actions), allowed = std::move(allowed)](
             const std::string& text) -> ParseResult {
    ParseResult parsed = parse_planner_response(text, allowed);
    if (auto* response = std::get_if<PlannerResponse>(&parsed)) {
      if (const ActionSpec* spec = find_action(actions, response->action_name)) {
        if (auto violation = validate_input(*spec, response->action_input)) {
          return ParseFailure{ParseFailure::Kind::MalformedActionInput, *violation,
                              response->action_input.dump()};
        }
      }
    }
    return parsed;
  };
}

json attempts_to_json(const std::vector<EscalationAttempt>& attempts) {
  json out = json::array();
  for (const auto& a : attempts) {
    out.push_back({
        {"tier", a.tier_index},
        {"model_id", a.model_id},
        {"attempt", a.attempt_no},
        {"outcome", std::string(to_string(a.outcome))},
        {"detail", a.detail},
        {"usage_event_id", a.usage_event_id},
        {"channel", a.channel},
        {"reason", a.escalation_reason},
    });
  }
  return out;
}

}  // namespace

RunResult Runner::run_task(const fs::path& run_dir, int run_index, const RunHooks& hooks) const {
  RunResult out;
  out.run_id = task_.id + "/" + config_.seed_label + "/run-" + std::to_string(run_index);

  std::error_code ec;
  fs::create_directories(run_dir, ec);
  std::unique_ptr<Workspace> workspace;
  try {
    workspace = std::make_unique<Workspace>(
        Workspace::create_from_seed(task_.seed_workspace, run_dir / "workspace"));
  } catch (const Error& e) {
    throw TaskPackageInvalid({std::string("seed workspace does not copy cleanly: ") + e.what()});
  }

  CostLedger ledger;
  Gateway gateway(ledger);
  for (const auto& tier : config_.cascade.tiers) {
    gateway.bind(tier.id, factory_(tier));
  }
  const ModelDescriptor& worker_model = config_.cascade.tiers.front();

  CascadeRouter router(config_.cascade, gateway,
                       CascadeRouter::CallParams{config_.planning_temperature,
                                                 config_.max_output_tokens,
                                                 config_.stop_sequences});
  CascadeState state;

  EnvParams env_params;
  env_params.truncation_cap = config_.truncation_cap;
  env_params.understand_chunk_chars = config_.understand_chunk_chars;
  env_params.interpreter_command = task_.interpreter_command;
  env_params.execute_timeout_s = task_.execute_timeout_s;
  env_params.scrub_env = config_.scrub_env;
  env_params.worker_temperature = config_.worker_temperature;
  env_params.max_output_tokens = config_.max_output_tokens;
  ActionEnvironment environment(*workspace, gateway, worker_model, env_params);

  RetrievalParams retrieval_params;
  retrieval_params.max_chars = config_.retrieval_max_chars;
  retrieval_params.temperature = config_.worker_temperature;
  retrieval_params.max_output_tokens = config_.max_output_tokens;

  // trace content is independent of the run index so scripted batches
  // produce byte-identical per-run traces
  const json header = build_header(task_.id + "/" + config_.seed_label);
  TraceWriter trace(run_dir / "trace.jsonl", header);
  out.trace_path = trace.path();
  ResearchLog log(header);

  RunStatus status = RunStatus::MaxActionsReached;
  std::string fatal;
  std::string current_plan;
  std::vector<EscalationAttempt> dangling_attempts;

  try {
    for (int step = 0; step < config_.max_actions; ++step) {
      const std::vector<ActionSpec> actions =
          available_planner_actions(state, config_.cascade, base_action_specs());

      // every model call from here on, retrieval included, belongs to this step
      const std::size_t events_before = ledger.events().size();

      const RetrievedContext retrieved =
          retrieve(log, current_plan, config_.retrieval_enabled, config_.short_term_k, gateway,
                   worker_model, retrieval_params, out.run_id, step);

      const std::string prompt = render_planner_prompt(
          task_.description_text, actions, log.recent_window(config_.short_term_k), retrieved);
      if (hooks.on_prompt) hooks.on_prompt(step, prompt);
      PlanStepResult plan =
          router.plan_next(prompt, state, make_validator(actions), out.run_id, step);
      std::vector<EscalationAttempt> attempts = std::move(plan.attempts);

      if (plan.exhausted()) {
        status = RunStatus::CascadeExhausted;
        if (plan.lifeline_cap_hit) fatal = "escalation required the expert tier at lifeline cap";
        dangling_attempts = std::move(attempts);
        break;
      }
      PlannerResponse response = std::move(*plan.response);

      if (response.action_name == kExpertActionName) {
        const std::string question = arg_string(response.action_input, "question");
        const std::vector<ActionSpec>& base = base_action_specs();
        const std::string expert_prompt = render_expert_prompt(
            render_planner_prompt(task_.description_text, base,
                                  log.recent_window(config_.short_term_k), retrieved),
            question);
        PlanStepResult expert =
            router.request_expert(expert_prompt, state, make_validator(base), out.run_id, step);
        attempts.insert(attempts.end(), expert.attempts.begin(), expert.attempts.end());
        if (expert.exhausted()) {
          status = RunStatus::CascadeExhausted;
          if (expert.lifeline_cap_hit) fatal = "expert request at lifeline cap";
          dangling_attempts = std::move(attempts);
          break;
        }
        response = std::move(*expert.response);  // the expert's plan replaces the step
      }

      Observation observation = environment.dispatch(
          response.action_name, response.action_input,
          [&log] { return summarize_steps(log.records()); },
          UsageContext{out.run_id, step, Purpose::worker_action});

      state.record_executed(config_.cascade,
                            ActionKey{response.action_name,
                                      canonical_input(response.action_input)});

      StepRecord record;
      record.index = step;
      record.planner_response = response;
      record.escalation_trace = std::move(attempts);
      record.action_name = response.action_name;
      record.action_input = response.action_input;
      record.observation = std::move(observation);
      for (std::size_t i = events_before; i < ledger.events().size(); ++i) {
        record.usage_event_ids.push_back(ledger.events()[i].id);
        record.usage_events.push_back(ledger.events()[i]);
      }
      current_plan = record.planner_response.plan_and_status;

      log.append_step(std::move(record));
      trace.append(log.records().back());
      if (hooks.on_step) hooks.on_step(log.records().back());

      if (log.records().back().action_name == kFinalAnswerActionName) {
        status = RunStatus::Completed;
        break;
      }
    }
  } catch (const Error& e) {
    status = RunStatus::EnvFatal;
    fatal = e.what();
  }

  out.status = status;
  out.step_count = static_cast<int>(log.size());
  out.lifelines_used = state.lifelines_used;

  std::string eval_error;
  if (status == RunStatus::Completed || status == RunStatus::MaxActionsReached) {
    const EvalOutcome eval = run_evaluator(task_, workspace->root());
    if (eval.score) {
      out.final_score = eval.score;
      try {
        const Improvement improvement = evaluate_success(
            *eval.score, task_.baseline_score, task_.metric_direction, task_.improvement_mode);
        out.improvement_fraction = improvement.fraction;
        out.success = improvement.success;
      } catch (const BaselineDegenerate& e) {
        eval_error = e.what();
      }
    } else {
      eval_error = eval.error;
    }
  }
  out.error = fatal.empty() ? eval_error : fatal;
  out.cost_report = ledger.report(pricing_);

  json result = {
      {"type", "result"},
      {"status", std::string(to_string(status))},
      {"success", out.success},
      {"step_count", out.step_count},
      {"cost_total_micros", out.cost_report.total.micros()},
      {"lifelines_used", out.lifelines_used},
  };
  if (out.final_score) result["final_score"] = out.final_score->to_string();
  if (out.improvement_fraction) result["improvement_fraction"] = *out.improvement_fraction;
  if (!out.error.empty()) result["error"] = out.error;
  if (!dangling_attempts.empty()) result["final_escalation"] = attempts_to_json(dangling_attempts);
  trace.finalize(result);
  return out;
}

BatchReport Runner::run_batch(const fs::path& out_dir, int n_runs, int parallelism,
                              const RunHooks& hooks) const {
  if (n_runs < 1) throw Error("run_batch requires at least one run");

  std::vector<RunResult> results(static_cast<std::size_t>(n_runs));
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::atomic<int> next{0};

  auto work = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n_runs) return;
      char name[16];
      std::snprintf(name, sizeof(name), "run-%03d", i + 1);
      try {
        results[static_cast<std::size_t>(i)] = run_task(out_dir / name, i + 1, hooks);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  const int workers = std::clamp(parallelism, 1, n_runs);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) threads.emplace_back(work);
    for (auto& t : threads) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  BatchReport report;
  report.task_id = task_.id;
  report.n_runs = n_runs;
  report.success_rate_pct = success_rate(results);
  for (const auto& run : results) {
    report.total_cost += run.cost_report.total;
    for (const auto& [model, cost] : run.cost_report.breakdown_by_model) {
      report.cost_by_model[model] += cost;
    }
    for (const auto& [purpose, cost] : run.cost_report.breakdown_by_purpose) {
      report.cost_by_purpose[purpose] += cost;
    }
  }
  report.average_cost_per_run = Money::divide(report.total_cost, n_runs);
  report.runs = std::move(results);
  return report;
}

json batch_report_to_json(const BatchReport& report) {
  json runs = json::array();
  for (const auto& run : report.runs) {
    json r = {
        {"run_id", run.run_id},
        {"status", std::string(to_string(run.status))},
        {"success", run.success},
        {"step_count", run.step_count},
        {"cost_micros", run.cost_report.total.micros()},
        {"cost", run.cost_report.total.to_string()},
        {"lifelines_used", run.lifelines_used},
        {"trace", run.trace_path.string()},
    };
    if (run.final_score) r["final_score"] = run.final_score->to_string();
    if (run.improvement_fraction) r["improvement_fraction"] = *run.improvement_fraction;
    if (!run.error.empty()) r["error"] = run.error;
    runs.push_back(std::move(r));
  }

  json by_model = json::object();
  for (const auto& [model, cost] : report.cost_by_model) by_model[model] = cost.to_string();
  json by_purpose = json::object();
  for (const auto& [purpose, cost] : report.cost_by_purpose) {
    by_purpose[std::string(to_string(purpose))] = cost.to_string();
  }

  return json{
      {"task_id", report.task_id},
      {"n_runs", report.n_runs},
      {"success_rate_pct", report.success_rate_pct},
      {"total_cost", report.total_cost.to_string()},
      {"average_cost_per_run", report.average_cost_per_run.to_string()},
      {"cost_by_model", std::move(by_model)},
      {"cost_by_purpose", std::move(by_purpose)},
      {"runs", std::move(runs)},
  };
}

}  // namespace weir
