#include "weir/actions.hpp"

#include <charconv>

namespace weir {

using nlohmann::json;

Observation Observation::make(std::string source_action, std::string text, std::size_t cap) {
  Observation obs;
  obs.source_action = std::move(source_action);
  obs.text = truncate_middle(text, cap, &obs.truncated);
  return obs;
}

std::string truncate_middle(const std::string& text, std::size_t cap, bool* clipped) {
  if (clipped != nullptr) *clipped = false;
  if (text.size() <= cap) return text;
  if (clipped != nullptr) *clipped = true;

  const std::size_t head = cap / 2;
  std::string marker =
      "\n... [" + std::to_string(text.size() - cap) + " characters elided] ...\n";
  // marker length only shrinks as the elided count shrinks, so one pass is
  // enough to stay under the cap
  std::size_t tail = cap > head + marker.size() ? cap - head - marker.size() : 0;
  marker = "\n... [" + std::to_string(text.size() - head - tail) + " characters elided] ...\n";

  std::string out = text.substr(0, head);
  out += marker;
  out += text.substr(text.size() - tail);
  if (out.size() > cap) out.resize(cap);
  return out;
}

namespace {

std::string_view type_name(ArgType t) {
  switch (t) {
    case ArgType::string: return "string";
    case ArgType::integer: return "integer";
    case ArgType::number: return "number";
    case ArgType::boolean: return "boolean";
  }
  return "string";
}

bool coercible(const json& value, ArgType type) {
  switch (type) {
    case ArgType::string:
      return value.is_string();
    case ArgType::integer: {
      if (value.is_number_integer()) return true;
      if (!value.is_string()) return false;
      const auto& s = value.get_ref<const std::string&>();
      long out = 0;
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
      return ec == std::errc() && p == s.data() + s.size();
    }
    case ArgType::number: {
      if (value.is_number()) return true;
      if (!value.is_string()) return false;
      const auto& s = value.get_ref<const std::string&>();
      char* end = nullptr;
      std::strtod(s.c_str(), &end);
      return end != s.c_str() && *end == '\0';
    }
    case ArgType::boolean:
      return value.is_boolean() ||
             (value.is_string() && (value == "true" || value == "false"));
  }
  return false;
}

}  // namespace

std::optional<std::string> validate_input(const ActionSpec& spec, const json& input) {
  if (!input.is_object()) return "Action Input must be a JSON object";
  for (const auto& arg : spec.input_schema) {
    auto it = input.find(arg.name);
    if (it == input.end()) {
      if (arg.required) {
        return "missing required argument '" + arg.name + "' for action '" + spec.name + "'";
      }
      continue;
    }
    if (!coercible(*it, arg.type)) {
      return "argument '" + arg.name + "' of action '" + spec.name + "' must be a " +
             std::string(type_name(arg.type));
    }
  }
  return std::nullopt;
}

std::string arg_string(const json& input, const std::string& name, const std::string& fallback) {
  auto it = input.find(name);
  if (it == input.end() || !it->is_string()) return fallback;
  return it->get<std::string>();
}

long arg_int(const json& input, const std::string& name, long fallback) {
  auto it = input.find(name);
  if (it == input.end()) return fallback;
  if (it->is_number_integer()) return it->get<long>();
  if (it->is_string()) {
    const auto& s = it->get_ref<const std::string&>();
    long out = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec == std::errc() && p == s.data() + s.size()) return out;
  }
  return fallback;
}

bool arg_bool(const json& input, const std::string& name, bool fallback) {
  auto it = input.find(name);
  if (it == input.end()) return fallback;
  if (it->is_boolean()) return it->get<bool>();
  if (it->is_string()) {
    if (*it == "true") return true;
    if (*it == "false") return false;
  }
  return fallback;
}

const std::vector<ActionSpec>& base_action_specs() {
  static const std::vector<ActionSpec> specs = [] {
    std::vector<ActionSpec> v;

    v.push_back({
        "List Files",
        "List the files and directories in a directory inside the workspace.",
        R"doc({"dir_path": "a relative path, e.g. "." or "data"})doc",
        "A sorted listing, one entry per line, directories suffixed with '/'.",
        ActionKind::low_level,
        "",
        {{"dir_path", ArgType::string, true, "directory to list"}},
    });

    v.push_back({
        "Read File",
        "Read the full content of a file in the workspace.",
        R"doc({"file_name": "a relative file path"})doc",
        "The file content (long files are clipped in the middle).",
        ActionKind::low_level,
        "",
        {{"file_name", ArgType::string, true, "file to read"}},
    });

    v.push_back({
        "Write File",
        "Write content to a file in the workspace, replacing what was there.",
        R"doc({"file_name": "a relative file path", "content": "the full new content"})doc",
        "A confirmation that the file was written.",
        ActionKind::low_level,
        "",
        {{"file_name", ArgType::string, true, "file to write"},
         {"content", ArgType::string, true, "new content"}},
    });

    v.push_back({
        "Append File",
        "Append content to the end of a file, creating it if absent.",
        R"doc({"file_name": "a relative file path", "content": "text to append"})doc",
        "A confirmation that the content was appended.",
        ActionKind::low_level,
        "",
        {{"file_name", ArgType::string, true, "file to append to"},
         {"content", ArgType::string, true, "text to append"}},
    });

    v.push_back({
        "Copy File",
        "Copy a file to another path inside the workspace.",
        R"doc({"source": "a relative file path", "destination": "a relative file path", "overwrite": "true or false (default false)"})doc",
        "A confirmation that the file was copied.",
        ActionKind::low_level,
        "",
        {{"source", ArgType::string, true, "file to copy"},
         {"destination", ArgType::string, true, "target path"},
         {"overwrite", ArgType::boolean, false, "allow replacing an existing target"}},
    });

    v.push_back({
        "Undo Edit Script",
        "Undo the most recent AI edit to a script, restoring its prior content.",
        R"doc({"script_name": "a relative file path"})doc",
        "A confirmation plus the restored content.",
        ActionKind::low_level,
        "",
        {{"script_name", ArgType::string, true, "file whose last AI edit to undo"}},
    });

    v.push_back({
        "Inspect Script Lines",
        "Show a numbered segment of a file.",
        R"doc({"script_name": "a relative file path", "start_line_number": "first line (1-based)", "end_line_number": "last line"})doc",
        "The requested lines, each prefixed with its line number.",
        ActionKind::high_level,
        "",  // programmatic: no profile
        {{"script_name", ArgType::string, true, "file to inspect"},
         {"start_line_number", ArgType::integer, true, "first line, 1-based"},
         {"end_line_number", ArgType::integer, true, "last line, clipped to file length"}},
    });

    v.push_back({
        "Understand File",
        "Have an expert read a whole file and report on the given aspects.",
        R"doc({"file_name": "a relative file path", "things_to_look_for": "what to look for and return"})doc",
        "A description of what the file contains with respect to the query.",
        ActionKind::high_level,
        std::string(kUnderstandFileProfile),
        {{"file_name", ArgType::string, true, "file to understand"},
         {"things_to_look_for", ArgType::string, true, "what to report on"}},
    });

    v.push_back({
        "Edit Script (AI)",
        "Have an expert rewrite a script according to an instruction and save it.",
        R"doc({"script_name": "a relative file path", "edit_instruction": "how to change it", "save_name": "where to save the result"})doc",
        "A unified diff of the change. The edit can be reverted with Undo Edit Script.",
        ActionKind::high_level,
        std::string(kEditScriptProfile),
        {{"script_name", ArgType::string, true, "file to edit"},
         {"edit_instruction", ArgType::string, true, "the change to make"},
         {"save_name", ArgType::string, true, "output path (may equal script_name)"}},
    });

    v.push_back({
        "Reflection",
        "Reflect over the research log with respect to a question.",
        R"doc({"things_to_reflect_on": "what to reflect on"})doc",
        "The reflection.",
        ActionKind::high_level,
        std::string(kReflectionProfile),
        {{"things_to_reflect_on", ArgType::string, true, "the reflection query"}},
    });

    v.push_back({
        "Execute Script",
        "Run a script in the workspace and observe its output.",
        R"doc({"script_name": "a relative file path"})doc",
        "Interleaved stdout and stderr of the run, plus the exit status.",
        ActionKind::low_level,
        "",
        {{"script_name", ArgType::string, true, "script to run"}},
    });

    v.push_back({
        std::string(kFinalAnswerActionName),
        "Declare that the task is finished. This ends the run.",
        R"doc({"final_answer": "optional closing summary"})doc",
        "Nothing; the run terminates and the final workspace is evaluated.",
        ActionKind::low_level,
        "",
        {{"final_answer", ArgType::string, false, "optional closing summary"}},
    });

    return v;
  }();
  return specs;
}

const ActionSpec& expert_action_spec() {
  static const ActionSpec spec = {
      std::string(kExpertActionName),
      "Ask a planning expert for help when you are stuck. Budgeted: a limited "
      "number of expert calls is available per run.",
      R"doc({"question": "what you are stuck on and what help you need"})doc",
      "A fresh plan from the expert, which replaces this step's plan.",
      ActionKind::high_level,
      std::string(kExpertProfile),
      {{"question", ArgType::string, true, "the help request"}},
  };
  return spec;
}

const ActionSpec* find_action(const std::vector<ActionSpec>& specs, std::string_view name) {
  for (const auto& spec : specs) {
    if (spec.name == name) return &spec;
  }
  return nullptr;
}

}  // namespace weir
