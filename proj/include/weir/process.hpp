#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace weir {

struct ExecSpec {
  std::vector<std::string> argv;  // argv[0] resolved via PATH
  std::filesystem::path workdir;
  int timeout_s = 900;
  std::vector<std::string> scrub_env;  // names removed from the child environment
};

struct ExecResult {
  std::string output;  // interleaved stdout + stderr
  std::optional<int> exit_status;  // absent when timed out; 128+signal when killed
  bool timed_out = false;
};

// Runs the command, capturing interleaved output. On timeout the whole
// process group is killed and the partial output is kept.
// Throws EnvError(SpawnFailure) when the command cannot be started.
ExecResult run_process(const ExecSpec& spec);

// Splits a command string on whitespace (no quoting).
std::vector<std::string> split_command(const std::string& command);

}  // namespace weir
