#include "weir/environment.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>

#include "weir/diff.hpp"
#include "weir/errors.hpp"
#include "weir/process.hpp"

namespace weir {

using nlohmann::json;

std::string strip_code_fence(const std::string& text) {
  std::size_t begin = text.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos || text.compare(begin, 3, "```") != 0) return text;
  std::size_t first_nl = text.find('\n', begin);
  if (first_nl == std::string::npos) return text;

  std::size_t end = text.find_last_not_of(" \t\r\n");
  if (end < 2 || text.compare(end - 2, 3, "```") != 0) return text;
  std::size_t close = end - 2;
  if (close <= first_nl) return text;
  // keep the content between the fence lines, including its trailing newline
  return text.substr(first_nl + 1, close - first_nl - 1);
}

ActionEnvironment::ActionEnvironment(Workspace& workspace, Gateway& gateway,
                                     ModelDescriptor worker_model, EnvParams params)
    : workspace_(workspace),
      gateway_(gateway),
      worker_model_(std::move(worker_model)),
      params_(std::move(params)) {}

Observation ActionEnvironment::make_obs(const std::string& source_action,
                                        std::string text) const {
  return Observation::make(source_action, std::move(text), params_.truncation_cap);
}

Observation ActionEnvironment::list_files(const std::string& dir) const {
  return make_obs("List Files", workspace_.list_dir(dir));
}

Observation ActionEnvironment::read_file(const std::string& file) const {
  return make_obs("Read File", workspace_.read(file));
}

Observation ActionEnvironment::write_file(const std::string& file, const std::string& content) {
  workspace_.write(file, content);
  return make_obs("Write File",
                  "File '" + file + "' written (" + std::to_string(content.size()) + " bytes).");
}

Observation ActionEnvironment::append_file(const std::string& file, const std::string& content) {
  workspace_.append(file, content);
  return make_obs("Append File", "Appended " + std::to_string(content.size()) +
                                     " bytes to '" + file + "'.");
}

Observation ActionEnvironment::copy_file(const std::string& source,
                                         const std::string& destination, bool overwrite) {
  workspace_.copy(source, destination, overwrite);
  return make_obs("Copy File", "Copied '" + source + "' to '" + destination + "'.");
}

Observation ActionEnvironment::undo_edit_script(const std::string& file) {
  workspace_.undo(file);
  if (workspace_.exists(file)) {
    return make_obs("Undo Edit Script", "Restored '" + file +
                                            "' to its content before the last AI edit:\n" +
                                            workspace_.read(file));
  }
  return make_obs("Undo Edit Script",
                  "Undid the creation of '" + file + "'; the file was removed.");
}

Observation ActionEnvironment::execute_script(const std::string& file) {
  const auto script = workspace_.resolve(file);
  if (!std::filesystem::is_regular_file(script)) {
    throw EnvError(EnvError::Kind::FileNotFound, "no such script: '" + file + "'");
  }

  ExecSpec spec;
  spec.argv = split_command(params_.interpreter_command);
  spec.argv.push_back(std::filesystem::relative(script, workspace_.root()).string());
  spec.workdir = workspace_.root();
  spec.timeout_s = params_.execute_timeout_s;
  spec.scrub_env = params_.scrub_env;

  ExecResult result = run_process(spec);
  if (result.timed_out) {
    throw EnvError(EnvError::Kind::Timeout,
                   "script '" + file + "' exceeded the " +
                       std::to_string(params_.execute_timeout_s) + " s timeout",
                   std::move(result.output));
  }
  Observation obs = make_obs("Execute Script", std::move(result.output));
  obs.exit_status = result.exit_status;
  return obs;
}

Observation ActionEnvironment::inspect_script_lines(const std::string& file, long start,
                                                    long end) const {
  if (start < 1 || start > end) {
    throw EnvError(EnvError::Kind::InvalidRange,
                   "invalid line range [" + std::to_string(start) + ", " +
                       std::to_string(end) + "]");
  }
  std::istringstream in(workspace_.read(file));
  std::string line;
  std::string out;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no < start) continue;
    if (line_no > end) break;  // end is clipped to the file length
    out += std::to_string(line_no) + ": " + line + "\n";
  }
  return make_obs("Inspect Script Lines", std::move(out));
}

Observation ActionEnvironment::worker_call(const std::string& source_action,
                                           const std::string& profile,
                                           const std::string& prompt, const UsageContext& ctx) {
  CompletionRequest request;
  request.profile = profile;
  request.prompt = prompt;
  request.temperature = params_.worker_temperature;
  request.max_output_tokens = params_.max_output_tokens;
  const CompletionOutcome call = gateway_.complete(worker_model_, request, ctx);
  return make_obs(source_action, call.result.text);
}

Observation ActionEnvironment::understand_file(const std::string& file,
                                               const std::string& query,
                                               const UsageContext& ctx) {
  const std::string content = workspace_.read(file);
  if (content.empty()) {
    return make_obs("Understand File", "The file '" + file + "' is empty.");
  }

  const std::size_t budget = std::max<std::size_t>(params_.understand_chunk_chars, 1);
  const std::size_t chunks = (content.size() + budget - 1) / budget;

  std::string combined;
  for (std::size_t i = 0; i < chunks; ++i) {
    const std::string chunk = content.substr(i * budget, budget);
    std::string prompt = "File: " + file;
    if (chunks > 1) {
      prompt += " (part " + std::to_string(i + 1) + " of " + std::to_string(chunks) + ")";
    }
    prompt += "\n```\n" + chunk + "\n```\n\nWhat to look for:\n" + query +
              "\n\nDescribe what this file contains with respect to the above. Quote the "
              "relevant lines where useful.";
    Observation part = worker_call("Understand File", std::string(kUnderstandFileProfile),
                                   prompt, ctx);
    if (!combined.empty()) combined += "\n";
    combined += part.text;
  }
  return make_obs("Understand File", std::move(combined));
}

Observation ActionEnvironment::edit_script_ai(const std::string& file,
                                              const std::string& instruction,
                                              const std::string& save_as,
                                              const UsageContext& ctx) {
  const std::string original = workspace_.read(file);

  const std::string prompt =
      "Here is the current content of " + file + ":\n```\n" + original +
      "```\n\nEdit instruction:\n" + instruction +
      "\n\nReturn the complete content of the file after applying the edit. Output only "
      "the file content, nothing else.";
  // Model call first: a gateway failure must leave the workspace untouched.
  Observation reply =
      worker_call("Edit Script (AI)", std::string(kEditScriptProfile), prompt, ctx);
  const std::string edited = strip_code_fence(reply.text);

  workspace_.push_backup(save_as);
  workspace_.write(save_as, edited);

  std::string diff = unified_diff(original, edited, file, save_as);
  if (diff.empty()) {
    diff = "The edited file is identical to the original; no changes were made.";
  }
  return make_obs("Edit Script (AI)", std::move(diff));
}

Observation ActionEnvironment::reflection(const std::string& query,
                                          const std::string& history_text,
                                          const UsageContext& ctx) {
  const std::string history = history_text.empty() ? "No steps have been taken yet.\n"
                                                   : history_text;
  const std::string prompt = "Here is the research log of the task so far:\n\n" + history +
                             "\nReflect on this:\n" + query;
  return worker_call("Reflection", std::string(kReflectionProfile), prompt, ctx);
}

Observation ActionEnvironment::dispatch(const std::string& action_name, const json& input,
                                        const std::function<std::string()>& history_provider,
                                        const UsageContext& ctx) {
  try {
    if (action_name == "List Files") {
      return list_files(arg_string(input, "dir_path", "."));
    }
    if (action_name == "Read File") {
      return read_file(arg_string(input, "file_name"));
    }
    if (action_name == "Write File") {
      return write_file(arg_string(input, "file_name"), arg_string(input, "content"));
    }
    if (action_name == "Append File") {
      return append_file(arg_string(input, "file_name"), arg_string(input, "content"));
    }
    if (action_name == "Copy File") {
      return copy_file(arg_string(input, "source"), arg_string(input, "destination"),
                       arg_bool(input, "overwrite", false));
    }
    if (action_name == "Undo Edit Script") {
      return undo_edit_script(arg_string(input, "script_name"));
    }
    if (action_name == "Execute Script") {
      return execute_script(arg_string(input, "script_name"));
    }
    if (action_name == "Inspect Script Lines") {
      return inspect_script_lines(arg_string(input, "script_name"),
                                  arg_int(input, "start_line_number", 0),
                                  arg_int(input, "end_line_number", 0));
    }
    if (action_name == "Understand File") {
      return understand_file(arg_string(input, "file_name"),
                             arg_string(input, "things_to_look_for"), ctx);
    }
    if (action_name == "Edit Script (AI)") {
      const std::string script = arg_string(input, "script_name");
      return edit_script_ai(script, arg_string(input, "edit_instruction"),
                            arg_string(input, "save_name", script), ctx);
    }
    if (action_name == "Reflection") {
      return reflection(arg_string(input, "things_to_reflect_on"),
                        history_provider ? history_provider() : "", ctx);
    }
    if (action_name == kFinalAnswerActionName) {
      return make_obs(std::string(kFinalAnswerActionName), "Final answer declared.");
    }
    return make_obs(action_name, "Error: unknown action '" + action_name + "'");
  } catch (const EnvError& e) {
    if (e.kind == EnvError::Kind::Timeout) {
      Observation obs = make_obs(action_name, e.payload + "\nError: " + e.what());
      return obs;
    }
    return make_obs(action_name, "Error: " + std::string(e.what()));
  } catch (const TransportError& e) {
    return make_obs(action_name, "Error: the model call failed (" + std::string(e.what()) +
                                     "). The action had no effect.");
  } catch (const RateLimited& e) {
    return make_obs(action_name, "Error: the model call failed (" + std::string(e.what()) +
                                     "). The action had no effect.");
  }
}

}  // namespace weir
