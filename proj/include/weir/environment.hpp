#pragma once

#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "weir/actions.hpp"
#include "weir/gateway.hpp"
#include "weir/workspace.hpp"

namespace weir {

struct EnvParams {
  std::size_t truncation_cap = Observation::kDefaultTruncationCap;
  std::size_t understand_chunk_chars = 20000;
  std::string interpreter_command = "python3";
  int execute_timeout_s = 900;
  std::vector<std::string> scrub_env;  // credential variables kept from subprocesses
  double worker_temperature = 0.01;
  int max_output_tokens = 4096;
};

// The registry of executable actions over one sandboxed workspace. Low-level
// actions are programmatic; high-level ones call the worker model with their
// profile.
class ActionEnvironment {
 public:
  ActionEnvironment(Workspace& workspace, Gateway& gateway, ModelDescriptor worker_model,
                    EnvParams params);

  Observation list_files(const std::string& dir) const;
  Observation read_file(const std::string& file) const;
  Observation write_file(const std::string& file, const std::string& content);
  Observation append_file(const std::string& file, const std::string& content);
  Observation copy_file(const std::string& source, const std::string& destination,
                        bool overwrite);
  Observation undo_edit_script(const std::string& file);
  Observation execute_script(const std::string& file);
  Observation inspect_script_lines(const std::string& file, long start, long end) const;
  Observation understand_file(const std::string& file, const std::string& query,
                              const UsageContext& ctx);
  Observation edit_script_ai(const std::string& file, const std::string& instruction,
                             const std::string& save_as, const UsageContext& ctx);
  Observation reflection(const std::string& query, const std::string& history_text,
                         const UsageContext& ctx);

  // Dispatch by registered action name. Environment faults and gateway
  // transport failures become error-marked observations: the planner must see
  // failures, not crash the run. Scripted-backend exhaustion stays fatal.
  Observation dispatch(const std::string& action_name, const nlohmann::json& input,
                       const std::function<std::string()>& history_provider,
                       const UsageContext& ctx);

  Workspace& workspace() { return workspace_; }
  const EnvParams& params() const { return params_; }

 private:
  Observation worker_call(const std::string& source_action, const std::string& profile,
                          const std::string& prompt, const UsageContext& ctx);
  Observation make_obs(const std::string& source_action, std::string text) const;

  Workspace& workspace_;
  Gateway& gateway_;
  ModelDescriptor worker_model_;
  EnvParams params_;
};

// Strips a single surrounding ``` fence pair, if present.
std::string strip_code_fence(const std::string& text);

}  // namespace weir
