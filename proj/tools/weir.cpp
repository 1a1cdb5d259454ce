#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "weir/config.hpp"
#include "weir/errors.hpp"
#include "weir/orchestrator.hpp"
#include "weir/report.hpp"
#include "weir/task.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in.is_open()) {
    throw weir::ConfigError("(file)", "cannot open config '" + path.string() + "'");
  }
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) {
    throw weir::ConfigError("(file)", "'" + path.string() + "' is not valid JSON");
  }
  return doc;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  out << text;
  if (!out.good()) throw weir::Error("cannot write '" + path.string() + "'");
}

bool has_previous_outputs(const fs::path& out_dir) {
  if (!fs::exists(out_dir)) return false;
  if (fs::exists(out_dir / "report.json")) return true;
  for (const auto& entry : fs::directory_iterator(out_dir)) {
    if (entry.is_directory() && fs::exists(entry.path() / "trace.jsonl")) return true;
  }
  return false;
}

int cmd_validate(const std::string& task_dir) {
  const auto diagnostics = weir::validate_task_dir(task_dir, /*evaluator_dry_run=*/true);
  if (diagnostics.empty()) {
    std::cout << "task package '" << task_dir << "' is valid\n";
    return kExitOk;
  }
  std::cerr << "task package '" << task_dir << "' is invalid:\n";
  for (const auto& d : diagnostics) std::cerr << "  - " << d << "\n";
  return kExitValidation;
}

struct RunFlags {
  std::string task_dir;
  std::string config_path;
  int runs = 1;
  int parallelism = 1;
  int retrieval = -1;     // -1 unset, 0 off, 1 on
  int max_actions = -1;   // -1 unset
  std::string seed_label;
  std::string out_dir = "out";
  bool force = false;
  bool verbose = false;
};

int cmd_run(const RunFlags& flags) {
  weir::TaskPackage task = weir::TaskPackage::load(flags.task_dir);

  // CLI overrides win over file values and are echoed into the trace header.
  json doc = read_json_file(flags.config_path);
  if (flags.retrieval >= 0) doc["run"]["retrieval_enabled"] = flags.retrieval == 1;
  if (flags.max_actions > 0) doc["run"]["max_actions"] = flags.max_actions;
  if (!flags.seed_label.empty()) doc["run"]["seed_label"] = flags.seed_label;
  weir::EngineConfig config =
      weir::parse_engine_config(doc, fs::path(flags.config_path).parent_path());

  const fs::path out_dir = flags.out_dir;
  if (has_previous_outputs(out_dir) && !flags.force) {
    std::cerr << "refusing to overwrite outputs in '" << out_dir.string()
              << "' (use --force)\n";
    return kExitValidation;
  }
  fs::create_directories(out_dir);

  weir::Runner runner(task, config.run, config.echo, config.config_hash);
  weir::RunHooks hooks;
  if (flags.verbose && flags.parallelism <= 1) {
    hooks.on_step = [](const weir::StepRecord& record) {
      std::cout << "  step " << record.index << ": " << record.action_name << " ("
                << record.escalation_trace.size() << " attempt(s))\n";
    };
  }
  weir::BatchReport batch = runner.run_batch(out_dir, flags.runs, flags.parallelism, hooks);

  const json batch_json = weir::batch_report_to_json(batch);
  // evaluator output can carry arbitrary bytes into error strings
  auto dump = [](const json& j) {
    return j.dump(2, ' ', false, json::error_handler_t::replace);
  };
  write_text(out_dir / "report.json", dump(batch_json) + "\n");

  json cost = {
      {"total", batch.total_cost.to_string()},
      {"total_micros", batch.total_cost.micros()},
      {"average_per_run", batch.average_cost_per_run.to_string()},
      {"by_model", batch_json["cost_by_model"]},
      {"by_purpose", batch_json["cost_by_purpose"]},
  };
  write_text(out_dir / "cost_report.json", dump(cost) + "\n");

  std::cout << "task " << batch.task_id << ": " << batch.n_runs << " run(s), success rate "
            << batch.success_rate_pct << "%, avg cost $"
            << batch.average_cost_per_run.to_string() << "/run\n";
  for (const auto& run : batch.runs) {
    std::cout << "  " << run.run_id << ": " << weir::to_string(run.status)
              << (run.success ? " success" : "")
              << (run.final_score ? " score " + run.final_score->to_string() : "") << ", "
              << run.step_count << " step(s), $" << run.cost_report.total.to_string();
    if (!run.error.empty()) std::cout << " [" << run.error << "]";
    std::cout << "\n";
  }
  std::cout << "traces and reports written to " << out_dir.string() << "\n";

  const bool all_env_fatal =
      std::all_of(batch.runs.begin(), batch.runs.end(), [](const weir::RunResult& r) {
        return r.status == weir::RunStatus::EnvFatal;
      });
  return all_env_fatal ? kExitRuntime : kExitOk;
}

int cmd_report(const std::string& trace_dir) {
  const auto files = weir::find_trace_files(trace_dir);
  weir::Report report = weir::build_report(files);
  std::cout << weir::format_report_table(report);
  return kExitOk;
}

int cmd_trace(const std::string& trace_file, int step) {
  weir::RunTrace trace = weir::read_trace(trace_file);
  std::cout << weir::format_transcript(trace, step);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cost-aware LLM multi-agent benchmark harness"};
  app.require_subcommand(1);

  // validate
  auto* validate = app.add_subcommand("validate", "check a task package");
  std::string validate_task;
  validate->add_option("--task,task", validate_task, "task package directory")->required();

  // run
  auto* run = app.add_subcommand("run", "run a task (single or batch)");
  RunFlags flags;
  run->add_option("--task", flags.task_dir, "task package directory")->required();
  run->add_option("--config", flags.config_path, "engine config file")->required();
  run->add_option("--runs", flags.runs, "number of runs")->check(CLI::PositiveNumber);
  run->add_option("--parallelism", flags.parallelism, "concurrent runs")
      ->check(CLI::PositiveNumber);
  auto* retrieval_on = run->add_flag("--retrieval", "enable retrieval from the research log");
  auto* retrieval_off = run->add_flag("--no-retrieval", "disable retrieval");
  retrieval_on->excludes(retrieval_off);
  run->add_option("--max-actions", flags.max_actions, "step budget per run");
  run->add_option("--seed-label", flags.seed_label, "label recorded in run ids");
  run->add_option("--out", flags.out_dir, "output directory");
  run->add_flag("--force", flags.force, "overwrite existing outputs");
  run->add_flag("--verbose,-v", flags.verbose, "print each step as it completes");

  // report
  auto* report = app.add_subcommand("report", "success/cost tables from traces");
  std::string report_dir;
  report->add_option("--traces,traces", report_dir, "directory holding trace files")->required();

  // trace
  auto* trace = app.add_subcommand("trace", "pretty-print a trace file");
  std::string trace_file;
  int trace_step = -1;
  trace->add_option("--file,file", trace_file, "trace file")->required();
  trace->add_option("--step", trace_step, "print only this step");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (validate->parsed()) return cmd_validate(validate_task);
    if (run->parsed()) {
      if (*retrieval_on) flags.retrieval = 1;
      if (*retrieval_off) flags.retrieval = 0;
      return cmd_run(flags);
    }
    if (report->parsed()) return cmd_report(report_dir);
    if (trace->parsed()) return cmd_trace(trace_file, trace_step);
  } catch (const weir::TaskPackageInvalid& e) {
    std::cerr << e.what() << "\n";
    return kExitValidation;
  } catch (const weir::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const weir::TraceCorrupt& e) {
    std::cerr << "corrupt trace: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const weir::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitValidation;
}
