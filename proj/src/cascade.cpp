#include "weir/cascade.hpp"

#include "weir/errors.hpp"

namespace weir {

void CascadeConfig::validate() const {
  if (tiers.empty()) throw ConfigError("cascade.tiers", "at least one tier is required");
  for (std::size_t i = 1; i < tiers.size(); ++i) {
    if (tiers[i].price_per_input_token < tiers[i - 1].price_per_input_token) {
      throw ConfigError("cascade.tiers[" + std::to_string(i) + "]",
                        "tiers must be ordered by non-decreasing input price ('" +
                            tiers[i].id + "' is cheaper than '" + tiers[i - 1].id + "')");
    }
  }
  if (expert_tier_index != tiers.size() - 1) {
    throw ConfigError("cascade.expert_tier_index", "the expert tier must be the last tier");
  }
  if (repeat_threshold < 2) {
    throw ConfigError("cascade.repeat_threshold", "must be at least 2");
  }
  if (lifeline_cap < 0) {
    throw ConfigError("cascade.lifeline_cap", "must be non-negative");
  }
}

std::string_view to_string(EscalationReason reason) {
  switch (reason) {
    case EscalationReason::FormatFailure: return "FormatFailure";
    case EscalationReason::RepeatedAction: return "RepeatedAction";
    case EscalationReason::ExpertRequested: return "ExpertRequested";
  }
  return "FormatFailure";
}

std::string_view to_string(EscalationAttempt::Outcome outcome) {
  switch (outcome) {
    case EscalationAttempt::Outcome::accepted: return "accepted";
    case EscalationAttempt::Outcome::format_failure: return "format_failure";
    case EscalationAttempt::Outcome::repeat_discarded: return "repeat_discarded";
  }
  return "accepted";
}

void CascadeState::record_executed(const CascadeConfig& config, ActionKey key) {
  recent_actions.push_back(std::move(key));
  const std::size_t bound = static_cast<std::size_t>(std::max(config.repeat_threshold, 2));
  while (recent_actions.size() > bound) recent_actions.pop_front();
}

bool detect_repeat(const std::deque<ActionKey>& recent, const ActionKey& candidate, int r,
                   RepeatTrigger trigger) {
  const int needed = trigger == RepeatTrigger::before_r ? r - 1 : r;
  if (needed <= 0) return true;
  if (recent.size() < static_cast<std::size_t>(needed)) return false;
  for (int i = 1; i <= needed; ++i) {
    if (!(recent[recent.size() - static_cast<std::size_t>(i)] == candidate)) return false;
  }
  return true;
}

std::vector<ActionSpec> available_planner_actions(const CascadeState& state,
                                                  const CascadeConfig& config,
                                                  const std::vector<ActionSpec>& base_actions) {
  std::vector<ActionSpec> actions = base_actions;
  if (config.has_expert_tier() && state.lifelines_used < config.lifeline_cap) {
    actions.push_back(expert_action_spec());
  }
  return actions;
}

CascadeRouter::CascadeRouter(const CascadeConfig& config, Gateway& gateway, CallParams params)
    : config_(config), gateway_(gateway), params_(std::move(params)) {
  config_.validate();
}

CascadeRouter::TierOutcome CascadeRouter::try_tier(
    std::size_t tier_index, const std::string& prompt, CascadeState& state,
    const ResponseValidator& validate, const std::string& run_id, int step_index,
    bool apply_repeat_check, Purpose purpose, const std::string& profile,
    std::vector<EscalationAttempt>& attempts) {
  const ModelDescriptor& tier = config_.tiers[tier_index];

  CompletionRequest request;
  request.profile = profile;
  request.prompt = prompt;
  request.temperature = params_.planning_temperature;
  request.max_output_tokens = params_.max_output_tokens;
  request.stop_sequences = params_.stop_sequences;

  TierOutcome outcome;
  for (int attempt = 1; attempt <= tier.max_format_retries; ++attempt) {
    if (is_expert_tier(tier_index)) {
      if (state.lifelines_used >= config_.lifeline_cap) {
        outcome.out_of_lifelines = true;
        return outcome;
      }
      ++state.lifelines_used;
    }

    const CompletionOutcome call =
        gateway_.complete(tier, request, UsageContext{run_id, step_index, purpose});

    EscalationAttempt record;
    record.tier_index = static_cast<int>(tier_index);
    record.model_id = tier.id;
    record.attempt_no = attempt;
    record.usage_event_id = call.usage_event_id;
    record.channel = purpose == Purpose::expert ? "expert" : "cascade";

    if (purpose == Purpose::expert && attempt == 1) {
      record.escalation_reason = to_string(EscalationReason::ExpertRequested);
    }

    ParseResult parsed = validate(call.result.text);
    if (auto* failure = std::get_if<ParseFailure>(&parsed)) {
      record.outcome = EscalationAttempt::Outcome::format_failure;
      record.detail = std::string(to_string(failure->kind)) + ": " + failure->detail;
      if (attempt == tier.max_format_retries) {
        record.escalation_reason = to_string(EscalationReason::FormatFailure);
      }
      attempts.push_back(std::move(record));
      continue;  // same prompt verbatim; temperature provides variation
    }

    PlannerResponse response = std::get<PlannerResponse>(std::move(parsed));
    if (apply_repeat_check) {
      const ActionKey key{response.action_name, canonical_input(response.action_input)};
      if (detect_repeat(state.recent_actions, key, config_.repeat_threshold,
                        config_.repeat_trigger)) {
        record.outcome = EscalationAttempt::Outcome::repeat_discarded;
        record.detail = "action '" + key.name + "' would repeat consecutively";
        record.escalation_reason = to_string(EscalationReason::RepeatedAction);
        attempts.push_back(std::move(record));
        outcome.repeat_discarded = true;
        return outcome;  // discarded unexecuted; escalate immediately
      }
    }

    record.outcome = EscalationAttempt::Outcome::accepted;
    attempts.push_back(std::move(record));
    outcome.response = std::move(response);
    return outcome;
  }
  return outcome;  // retries exhausted at this tier
}

PlanStepResult CascadeRouter::plan_next(const std::string& prompt, CascadeState& state,
                                        const ResponseValidator& validate,
                                        const std::string& run_id, int step_index) {
  PlanStepResult result;
  for (std::size_t tier_index = 0; tier_index < config_.tiers.size(); ++tier_index) {
    // Proposals from tiers reached by escalation are trusted even when they
    // repeat the discarded action.
    const bool apply_repeat_check = tier_index == 0;
    TierOutcome outcome =
        try_tier(tier_index, prompt, state, validate, run_id, step_index, apply_repeat_check,
                 Purpose::planning, std::string(kPlannerProfile), result.attempts);
    if (outcome.response) {
      result.response = std::move(outcome.response);
      return result;
    }
    if (outcome.out_of_lifelines) {
      result.lifeline_cap_hit = true;
      return result;
    }
  }
  return result;  // exhausted
}

PlanStepResult CascadeRouter::request_expert(const std::string& prompt, CascadeState& state,
                                             const ResponseValidator& validate,
                                             const std::string& run_id, int step_index) {
  if (!config_.has_expert_tier()) {
    throw LifelinesExhausted("this cascade has no expert tier");
  }
  if (state.lifelines_used >= config_.lifeline_cap) {
    throw LifelinesExhausted("lifelines exhausted (" + std::to_string(state.lifelines_used) +
                             "/" + std::to_string(config_.lifeline_cap) + ")");
  }

  PlanStepResult result;
  TierOutcome outcome = try_tier(config_.expert_tier_index, prompt, state, validate, run_id,
                                 step_index, /*apply_repeat_check=*/false, Purpose::expert,
                                 std::string(kExpertProfile), result.attempts);
  if (outcome.response) {
    result.response = std::move(outcome.response);
  } else if (outcome.out_of_lifelines) {
    result.lifeline_cap_hit = true;
  }
  return result;
}

}  // namespace weir
