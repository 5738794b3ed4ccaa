#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include "fairaudit/agents/prompts.hpp"
#include "fairaudit/core/plan.hpp"
#include "fairaudit/gateway/gateway.hpp"
#include "fairaudit/rag/vector_index.hpp"
#include "fairaudit/runner/records.hpp"

namespace fairaudit::runner {

/// ISO-8601 UTC timestamp source for run records.
using Clock = std::function<std::string()>;

Clock system_clock();
/// Always "1970-01-01T00:00:00Z"; keeps mock runs byte-reproducible.
Clock fixed_clock();

struct RunnerOptions {
  int parallelism = 1;
  Clock clock = system_clock();
};

/// Embedded knowledge sources for the AgentRag condition.
struct KnowledgeBase {
  std::optional<rag::VectorIndex> corpus;
  std::optional<rag::VectorIndex> library;
};

/// Ingests the corpus and fairness library and returns their indexes.
/// Indexes persisted under `<output_dir>/indexes/` are reused when their
/// embed model and chunk fingerprint match; otherwise they are rebuilt
/// and written there.
KnowledgeBase prepare_knowledge(const ExperimentPlan& plan, gateway::Gateway& gateway);

/// Aborted run: an error outside per-run parse failures. Records finished
/// before the failure remain in the results file.
class RunAborted : public std::runtime_error {
 public:
  RunAborted(const std::string& message, std::size_t records_written)
      : std::runtime_error(message), records_written_(records_written) {}

  std::size_t records_written() const { return records_written_; }

 private:
  std::size_t records_written_;
};

inline constexpr const char* kResultsFileName = "results.jsonl";

/// Runs every (model, condition, repetition) cell not already present in
/// `<output_dir>/results.jsonl`, appending one record per finished cell in
/// plan order. Returns the results file path.
std::filesystem::path execute_plan(const ExperimentPlan& plan, gateway::Gateway& gateway,
                                   const RunnerOptions& options = {});

/// One pipeline pass for a single cell. Exposed for tests.
RunRecord run_cell(const ExperimentPlan& plan, gateway::Gateway& gateway,
                   const agents::PromptSet& prompts, const KnowledgeBase& knowledge,
                   const ModelSpec& model, Condition condition, int repetition,
                   const Clock& clock);

}  // namespace fairaudit::runner
