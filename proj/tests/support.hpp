#pragma once

// Shared fixtures for the unit suites and the acceptance binary.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "weir/cascade.hpp"
#include "weir/gateway.hpp"
#include "weir/grammar.hpp"
#include "weir/model.hpp"
#include "weir/orchestrator.hpp"

namespace weir::testing {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;

  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("weir-test-" + tag + "-" + std::to_string(::getpid()) + "-" +
            std::to_string(++counter));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

inline void write_file(const fs::path& p, const std::string& content) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << content;
}

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

inline ModelDescriptor scripted_model(std::string id, std::vector<std::string> replies,
                                      int max_format_retries = 3,
                                      const std::string& price_in = "0",
                                      const std::string& price_out = "0",
                                      double chars_per_token = 4.0) {
  ModelDescriptor model;
  model.id = std::move(id);
  model.price_per_input_token = TokenPrice::parse(price_in);
  model.price_per_output_token = TokenPrice::parse(price_out);
  model.max_format_retries = max_format_retries;
  model.endpoint = ScriptedEndpoint{std::move(replies), chars_per_token};
  return model;
}

// A structurally valid planner response choosing the given action.
inline std::string valid_response(const std::string& action, const std::string& input_json,
                                  const std::string& salt = "") {
  return "Reflection: previous observation noted" + (salt.empty() ? "" : " " + salt) +
         ".\n"
         "Research Plan and Status: keep going.\n"
         "Fact Check: nothing new.\n"
         "Thought: take the next step.\n"
         "Action: " +
         action + "\nAction Input: " + input_json + "\n";
}

inline const std::string kMalformedResponse = "I am not following the format at all.";

inline CascadeConfig two_tier_cascade(ModelDescriptor base, ModelDescriptor expert, int r = 3,
                                      int lifelines = 5) {
  CascadeConfig config;
  config.tiers = {std::move(base), std::move(expert)};
  config.tiers[0].tier_rank = 0;
  config.tiers[1].tier_rank = 1;
  config.repeat_threshold = r;
  config.lifeline_cap = lifelines;
  config.expert_tier_index = 1;
  return config;
}

inline ScriptedBackend* scripted_backend(Gateway& gateway, const std::string& model_id) {
  return dynamic_cast<ScriptedBackend*>(gateway.backend(model_id));
}

// Lets a test keep scripted backends alive beyond the per-run gateway that
// uses them, so request logs stay inspectable after the run.
class SharedScriptedBackend : public Backend {
 public:
  explicit SharedScriptedBackend(std::shared_ptr<ScriptedBackend> inner)
      : inner_(std::move(inner)) {}
  CompletionResult complete(const ModelDescriptor& model,
                            const CompletionRequest& request) override {
    return inner_->complete(model, request);
  }

 private:
  std::shared_ptr<ScriptedBackend> inner_;
};

using BackendTaps = std::map<std::string, std::shared_ptr<ScriptedBackend>>;

inline auto tapping_factory(BackendTaps& taps) {
  return [&taps](const ModelDescriptor& m) -> std::unique_ptr<Backend> {
    auto inner = std::make_shared<ScriptedBackend>(std::get<ScriptedEndpoint>(m.endpoint));
    taps[m.id] = inner;
    return std::make_unique<SharedScriptedBackend>(inner);
  };
}

inline fs::path source_dir() { return fs::path(WEIR_SOURCE_DIR); }
inline fs::path toy_task_dir() { return source_dir() / "tasks" / "toy-score"; }

}  // namespace weir::testing
