#include "weir/prompt.hpp"

#include "weir/grammar.hpp"

namespace weir {

namespace {

constexpr std::string_view kFormatInstructions =
    "Respond with exactly the following sections, in this order:\n"
    "Reflection: What the latest observation means and, if it shows an error, what caused "
    "it and how to fix it.\n"
    "Research Plan and Status: The full high-level plan, with the current status and the "
    "results confirmed so far.\n"
    "Fact Check: For every objective statement updated above, whether it is guessed or "
    "directly confirmed by an observation.\n"
    "Thought: What you are about to do and why.\n"
    "Action: The name of exactly one action from the list above.\n"
    "Action Input: The input to the action, as a valid JSON object.\n";

}  // namespace

std::string render_action_docs(const std::vector<ActionSpec>& actions) {
  std::string out;
  for (const auto& action : actions) {
    out += "- Name: " + action.name + "\n";
    out += "  Description: " + action.description + "\n";
    out += "  Usage: " + action.usage + "\n";
    out += "  Returns: " + action.returns + "\n";
  }
  return out;
}

std::string retrieved_block(const RetrievedContext& retrieved) {
  if (retrieved.empty()) return "";
  return "Relevant information retrieved from earlier steps (" +
         std::to_string(retrieved.from_step) + "-" + std::to_string(retrieved.to_step) +
         "):\n" + retrieved.summary + "\n\n";
}

std::string render_planner_prompt(const std::string& task_description,
                                  const std::vector<ActionSpec>& actions,
                                  std::span<const StepRecord> recent_steps,
                                  const RetrievedContext& retrieved) {
  std::string out;
  out += "You are working on the following task:\n\n";
  out += task_description;
  out += "\n\nYou can take exactly one action per step, chosen from these actions:\n\n";
  out += render_action_docs(actions);
  out += "\n";
  out += retrieved_block(retrieved);
  out += "Most recent steps:\n\n";
  if (recent_steps.empty()) {
    out += "No steps taken yet.\n\n";
  } else {
    out += summarize_steps(recent_steps);
  }
  out += kFormatInstructions;
  return out;
}

std::string render_expert_prompt(const std::string& planner_prompt,
                                 const std::string& question) {
  return planner_prompt +
         "\nThe planner working on this task is stuck and asked for your help with this "
         "question:\n" +
         question + "\n\nProvide a fresh plan for the next step in the required format.\n";
}

}  // namespace weir
