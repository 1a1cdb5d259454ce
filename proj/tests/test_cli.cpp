#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>

#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "support.hpp"
#include "weir/memory.hpp"

using namespace weir;
using namespace weir::testing;
using nlohmann::json;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

CliResult cli(const std::string& args, const fs::path& capture_dir) {
  static int counter = 0;
  const fs::path capture = capture_dir / ("cli-out-" + std::to_string(++counter) + ".txt");
  const std::string command =
      std::string(WEIR_CLI_PATH) + " " + args + " > " + capture.string() + " 2>&1";
  const int raw = std::system(command.c_str());
  CliResult result;
  result.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  result.output = read_file(capture);
  return result;
}

const std::string kToyTask = toy_task_dir().string();
const std::string kGoldenConfig = (source_dir() / "configs/golden-scripted.json").string();

}  // namespace

TEST_CASE("validate: shipped toy task passes, broken manifests name the field") {
  TempDir dir("cli-validate");
  CHECK(cli("validate " + kToyTask, dir.path).exit_code == 0);

  // missing baseline_score
  write_file(dir.path / "task" / "manifest.json",
             json{{"id", "broken"},
                  {"metric_direction", "higher_is_better"},
                  {"evaluator", json::array({"python3", "solve.py"})}}
                 .dump());
  write_file(dir.path / "task" / "description.txt", "d");
  write_file(dir.path / "task" / "workspace" / "solve.py", "print(1)\n");
  const CliResult missing = cli("validate " + (dir.path / "task").string(), dir.path);
  CHECK(missing.exit_code == 1);
  CHECK(missing.output.find("baseline_score") != std::string::npos);

  // evaluator command that cannot be found
  write_file(dir.path / "task2" / "manifest.json",
             json{{"id", "broken2"},
                  {"baseline_score", "0.5"},
                  {"metric_direction", "higher_is_better"},
                  {"evaluator", json::array({"no-such-evaluator-cmd"})}}
                 .dump());
  write_file(dir.path / "task2" / "description.txt", "d");
  write_file(dir.path / "task2" / "workspace" / "solve.py", "print(1)\n");
  const CliResult spawn = cli("validate " + (dir.path / "task2").string(), dir.path);
  CHECK(spawn.exit_code == 1);
  CHECK(spawn.output.find("evaluator dry run failed") != std::string::npos);
}

TEST_CASE("run: writes traces and reports, refuses overwrite without --force") {
  TempDir dir("cli-run");
  const std::string out = (dir.path / "out").string();
  const std::string base =
      "run --task " + kToyTask + " --config " + kGoldenConfig + " --runs 1 --out " + out;

  const CliResult first = cli(base, dir.path);
  CHECK(first.exit_code == 0);
  CHECK(first.output.find("success rate 100%") != std::string::npos);
  CHECK(fs::exists(dir.path / "out" / "run-001" / "trace.jsonl"));
  CHECK(fs::exists(dir.path / "out" / "report.json"));
  CHECK(fs::exists(dir.path / "out" / "cost_report.json"));

  const CliResult refused = cli(base, dir.path);
  CHECK(refused.exit_code == 1);
  CHECK(refused.output.find("--force") != std::string::npos);

  CHECK(cli(base + " --force", dir.path).exit_code == 0);
}

TEST_CASE("run: --no-retrieval lands in the trace header; --runs sets denominators") {
  TempDir dir("cli-flags");
  const std::string out = (dir.path / "out").string();
  const CliResult result =
      cli("run --task " + kToyTask + " --config " + kGoldenConfig +
              " --runs 2 --no-retrieval --out " + out,
          dir.path);
  CHECK(result.exit_code == 0);

  const RunTrace trace = read_trace(dir.path / "out" / "run-001" / "trace.jsonl");
  CHECK(trace.header["retrieval_enabled"] == false);
  CHECK(trace.header["config"]["run"]["retrieval_enabled"] == false);

  const json report = json::parse(read_file(dir.path / "out" / "report.json"));
  CHECK(report["n_runs"] == 2);
  CHECK(report["runs"].size() == 2);
  CHECK(fs::exists(dir.path / "out" / "run-002" / "trace.jsonl"));

  // --max-actions override is echoed too
  TempDir dir2("cli-max");
  const CliResult capped =
      cli("run --task " + kToyTask + " --config " + kGoldenConfig +
              " --runs 1 --max-actions 2 --out " + (dir2.path / "out").string(),
          dir2.path);
  CHECK(capped.exit_code == 0);
  const RunTrace capped_trace = read_trace(dir2.path / "out" / "run-001" / "trace.jsonl");
  CHECK(capped_trace.header["max_actions"] == 2);
  REQUIRE(capped_trace.result.has_value());
  CHECK((*capped_trace.result)["status"] == "MaxActionsReached");
}

TEST_CASE("report and trace subcommands") {
  TempDir dir("cli-report");
  const std::string out = (dir.path / "out").string();
  REQUIRE(cli("run --task " + kToyTask + " --config " + kGoldenConfig + " --runs 1 --out " + out,
              dir.path)
              .exit_code == 0);

  const CliResult report = cli("report " + out, dir.path);
  CHECK(report.exit_code == 0);
  CHECK(report.output.find("toy-score") != std::string::npos);

  const std::string trace_file = (dir.path / "out" / "run-001" / "trace.jsonl").string();
  const CliResult step2 = cli("trace " + trace_file + " --step 2", dir.path);
  CHECK(step2.exit_code == 0);
  CHECK(step2.output.find("== step 2") != std::string::npos);
  CHECK(step2.output.find("== step 0") == std::string::npos);

  // corrupt traces exit 2 and carry the line number
  write_file(dir.path / "bad.jsonl",
             json{{"type", "header"}, {"version", 1}}.dump() + "\nnot json\n");
  const CliResult corrupt = cli("trace " + (dir.path / "bad.jsonl").string(), dir.path);
  CHECK(corrupt.exit_code == 2);
  CHECK(corrupt.output.find("line 2") != std::string::npos);

  // no traces at all is a runtime error
  fs::create_directories(dir.path / "empty");
  CHECK(cli("report " + (dir.path / "empty").string(), dir.path).exit_code == 2);
}

TEST_CASE("run: an invalid task package exits 1 before any step") {
  TempDir dir("cli-invalid");
  write_file(dir.path / "task" / "manifest.json", "{}");
  const CliResult result =
      cli("run --task " + (dir.path / "task").string() + " --config " + kGoldenConfig +
              " --out " + (dir.path / "out").string(),
          dir.path);
  CHECK(result.exit_code == 1);
}
