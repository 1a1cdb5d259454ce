#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "weir/actions.hpp"
#include "weir/memory.hpp"

namespace weir {

// Stamped into trace headers so transcripts stay comparable across versions
// of the rendered template.
inline constexpr std::string_view kPromptTemplateVersion = "1";

std::string render_action_docs(const std::vector<ActionSpec>& actions);

// The retrieved-context block as it appears in the prompt; "" when there is
// nothing retrieved, in which case the block is omitted entirely.
std::string retrieved_block(const RetrievedContext& retrieved);

// Fixed order: task description, action docs, retrieved context block,
// last-k step summaries (or an explicit no-steps marker), response-format
// instructions.
std::string render_planner_prompt(const std::string& task_description,
                                  const std::vector<ActionSpec>& actions,
                                  std::span<const StepRecord> recent_steps,
                                  const RetrievedContext& retrieved);

// Planner prompt (rendered without the expert action) plus the delegating
// planner's question.
std::string render_expert_prompt(const std::string& planner_prompt, const std::string& question);

}  // namespace weir
