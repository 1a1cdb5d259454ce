#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "weir/actions.hpp"
#include "weir/gateway.hpp"
#include "weir/grammar.hpp"
#include "weir/model.hpp"

namespace weir {

// Which reading of the consecutive-repeat protocol to apply: escalate on the
// proposal that would complete r consecutive occurrences (before_r, default),
// or only once r occurrences already sit in the history (at_r).
enum class RepeatTrigger { before_r, at_r };

struct CascadeConfig {
  std::vector<ModelDescriptor> tiers;  // ascending cost
  int repeat_threshold = 3;            // r
  int lifeline_cap = 5;                // l
  std::size_t expert_tier_index = 0;   // always the last tier
  RepeatTrigger repeat_trigger = RepeatTrigger::before_r;

  // A lone tier is just the base model: no expert, no lifeline accounting.
  bool has_expert_tier() const { return tiers.size() >= 2; }

  void validate() const;  // throws ConfigError on tier-order violations
};

struct ActionKey {
  std::string name;
  std::string canonical_input;

  friend bool operator==(const ActionKey&, const ActionKey&) = default;
};

enum class EscalationReason { FormatFailure, RepeatedAction, ExpertRequested };
std::string_view to_string(EscalationReason reason);

struct EscalationAttempt {
  int tier_index = 0;
  std::string model_id;
  int attempt_no = 1;  // 1-based within the tier

  enum class Outcome { accepted, format_failure, repeat_discarded };
  Outcome outcome = Outcome::accepted;
  std::string detail;
  std::int64_t usage_event_id = -1;
  std::string channel = "cascade";  // "cascade" | "expert"
  // set on the attempt that causes a tier transition: FormatFailure on a
  // tier's final failed retry, RepeatedAction on a discarded proposal,
  // ExpertRequested on the first attempt of an ask-the-expert call
  std::string escalation_reason;
};
std::string_view to_string(EscalationAttempt::Outcome outcome);

// The escalation state for one run.
struct CascadeState {
  int lifelines_used = 0;
  std::deque<ActionKey> recent_actions;  // bounded at repeat_threshold

  // Appends an executed action to the repeat window.
  void record_executed(const CascadeConfig& config, ActionKey key);
};

// True iff accepting `candidate` would complete `r` consecutive identical
// actions (before_r), or iff `r` identical actions already precede it (at_r).
bool detect_repeat(const std::deque<ActionKey>& recent, const ActionKey& candidate, int r,
                   RepeatTrigger trigger = RepeatTrigger::before_r);

// base actions plus the ask-the-expert action while lifelines remain.
std::vector<ActionSpec> available_planner_actions(const CascadeState& state,
                                                  const CascadeConfig& config,
                                                  const std::vector<ActionSpec>& base_actions);

using ResponseValidator = std::function<ParseResult(const std::string&)>;

struct PlanStepResult {
  std::optional<PlannerResponse> response;  // empty => cascade exhausted
  std::vector<EscalationAttempt> attempts;
  bool lifeline_cap_hit = false;  // exhaustion annotation

  bool exhausted() const { return !response.has_value(); }
};

// Walks the tier chain for one planning step: per tier up to
// max_format_retries attempts on format failures, immediate escalation when
// the parsed action would trip the repeat protocol, lifeline accounting on
// every expert-tier call. Retries reuse the same prompt verbatim.
class CascadeRouter {
 public:
  struct CallParams {
    double planning_temperature = 0.2;
    int max_output_tokens = 4096;
    std::vector<std::string> stop_sequences;
  };

  CascadeRouter(const CascadeConfig& config, Gateway& gateway, CallParams params);

  PlanStepResult plan_next(const std::string& prompt, CascadeState& state,
                           const ResponseValidator& validate, const std::string& run_id,
                           int step_index);

  // One ask-the-expert exchange (expert profile, purpose=expert). Pre:
  // lifelines remain; throws LifelinesExhausted otherwise.
  PlanStepResult request_expert(const std::string& prompt, CascadeState& state,
                                const ResponseValidator& validate, const std::string& run_id,
                                int step_index);

  const CascadeConfig& config() const { return config_; }

 private:
  struct TierOutcome {
    std::optional<PlannerResponse> response;
    bool repeat_discarded = false;
    bool out_of_lifelines = false;
  };

  TierOutcome try_tier(std::size_t tier_index, const std::string& prompt, CascadeState& state,
                       const ResponseValidator& validate, const std::string& run_id,
                       int step_index, bool apply_repeat_check, Purpose purpose,
                       const std::string& profile, std::vector<EscalationAttempt>& attempts);

  bool is_expert_tier(std::size_t tier_index) const {
    return config_.has_expert_tier() && tier_index == config_.expert_tier_index;
  }

  CascadeConfig config_;
  Gateway& gateway_;
  CallParams params_;
};

}  // namespace weir
