// fairaudit: run the ablation grid, analyze results, emit tables and plot data.

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>

#include "fairaudit/core/plan.hpp"
#include "fairaudit/gateway/gateway.hpp"
#include "fairaudit/gateway/mock_transport.hpp"
#include "fairaudit/rag/corpus.hpp"
#include "fairaudit/runner/analysis.hpp"
#include "fairaudit/runner/report.hpp"
#include "fairaudit/runner/runner.hpp"

namespace fs = std::filesystem;
using namespace fairaudit;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct TransportFlags {
  std::string mock_dir;
  std::string replay_log;
  std::string request_log;
  int timeout_s = 300;
  int retry_backoff_ms = 2000;
};

std::string base_url(const ExperimentPlan& plan) {
  if (const char* env = std::getenv("FAIRAUDIT_BASE_URL"); env && *env) return env;
  if (plan.server_url) return *plan.server_url;
  return "http://localhost:11434";
}

std::unique_ptr<gateway::Gateway> make_gateway(const ExperimentPlan& plan, const TransportFlags& f) {
  std::shared_ptr<gateway::Transport> transport;
  if (!f.mock_dir.empty()) {
    transport = std::make_shared<gateway::MockTransport>(gateway::load_mock_fixtures(f.mock_dir));
  } else if (!f.replay_log.empty()) {
    transport = std::make_shared<gateway::ReplayTransport>(f.replay_log);
  } else {
    transport = std::make_shared<gateway::HttpTransport>(base_url(plan), std::chrono::seconds(f.timeout_s));
  }
  gateway::GatewayOptions opts;
  opts.retry_backoff = std::chrono::milliseconds(f.retry_backoff_ms);
  auto gw = std::make_unique<gateway::Gateway>(std::move(transport), opts);
  if (!f.request_log.empty()) gw->set_request_log(std::make_shared<gateway::RequestLog>(f.request_log));
  return gw;
}

void add_transport_flags(CLI::App* cmd, TransportFlags& f) {
  cmd->add_option("--mock", f.mock_dir, "Serve chat/embed calls from a fixtures directory")
      ->check(CLI::ExistingDirectory);
  cmd->add_option("--replay", f.replay_log, "Serve calls from a recorded request log")
      ->check(CLI::ExistingFile);
  cmd->add_option("--request-log", f.request_log, "Append every exchange to this JSONL file");
  cmd->add_option("--timeout", f.timeout_s, "HTTP timeout in seconds")->check(CLI::PositiveNumber);
  cmd->add_option("--retry-backoff-ms", f.retry_backoff_ms, "Delay between connection retries")
      ->check(CLI::NonNegativeNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fairness-audit ablation runner"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  std::string config;
  TransportFlags tflags;
  int parallel = 1;
  std::string results, out_dir;

  auto* ingest = app.add_subcommand("ingest", "Chunk and embed the corpus and fairness library");
  ingest->add_option("--config", config, "Experiment plan (JSON)")->required()->check(CLI::ExistingFile);
  add_transport_flags(ingest, tflags);

  auto* run = app.add_subcommand("run", "Execute every pending run of the plan");
  run->add_option("--config", config, "Experiment plan (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--parallel", parallel, "Concurrent runs")->check(CLI::PositiveNumber);
  add_transport_flags(run, tflags);

  auto* analyze = app.add_subcommand("analyze", "Print the statistics bundle as JSON");
  analyze->add_option("--results", results, "results.jsonl")->required()->check(CLI::ExistingFile);

  auto* report = app.add_subcommand("report", "Write report.md and CSV tables");
  report->add_option("--results", results, "results.jsonl")->required()->check(CLI::ExistingFile);
  report->add_option("--out", out_dir, "Output directory")->required();

  auto* plot = app.add_subcommand("plot-data", "Write plot_data.csv and plot_annotations.csv");
  plot->add_option("--results", results, "results.jsonl")->required()->check(CLI::ExistingFile);
  plot->add_option("--out", out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    if (*ingest || *run) {
      if (!tflags.mock_dir.empty() && !tflags.replay_log.empty()) {
        std::cerr << "error: --mock and --replay are mutually exclusive\n";
        return kExitValidation;
      }
      const ExperimentPlan plan = load_plan(config);
      check_paths_exist(plan);
      auto gw = make_gateway(plan, tflags);
      if (*ingest) {
        const auto kb = runner::prepare_knowledge(plan, *gw);
        std::cout << "corpus chunks: " << kb.corpus->size() << "\nlibrary chunks: " << kb.library->size()
                  << "\nindexes: " << (plan.output_dir / "indexes").string() << '\n';
        return 0;
      }
      runner::RunnerOptions opts;
      opts.parallelism = parallel;
      const bool deterministic = !tflags.mock_dir.empty() || !tflags.replay_log.empty();
      opts.clock = deterministic ? runner::fixed_clock() : runner::system_clock();
      const auto path = runner::execute_plan(plan, *gw, opts);
      std::cout << path.string() << '\n';
      return 0;
    }
    if (*analyze) {
      std::cout << runner::to_json(runner::analyze_results(results)).dump(2) << '\n';
      return 0;
    }
    const auto records = runner::read_results(results);
    if (*report) {
      runner::write_report(runner::render_tables(runner::analyze(records)), out_dir);
      std::cout << (fs::path(out_dir) / "report.md").string() << '\n';
    } else {
      runner::write_plot_data(runner::emit_plot_data(records), out_dir);
      std::cout << (fs::path(out_dir) / runner::kPlotDataFile).string() << '\n';
    }
    return 0;
  } catch (const PlanError& e) {
    std::cerr << "plan error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const runner::AnalysisError& e) {
    std::cerr << "analysis error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const runner::ResultsError& e) {
    std::cerr << "results error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const rag::RagError& e) {
    std::cerr << "corpus error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const runner::RunAborted& e) {
    std::cerr << "run aborted after " << e.records_written() << " record(s): " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
