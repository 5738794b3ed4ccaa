#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairaudit/core/model.hpp"
#include "fairaudit/runner/records.hpp"
#include "fairaudit/stats/descriptive.hpp"
#include "fairaudit/stats/rank_tests.hpp"

namespace fairaudit::runner {

/// Comparisons of one (model, agent) panel, in table order.
inline constexpr std::array<std::pair<Condition, Condition>, 3> kPairwiseComparisons = {{
    {Condition::AgentNoRag, Condition::LlmOnly},
    {Condition::AgentRag, Condition::LlmOnly},
    {Condition::AgentRag, Condition::AgentNoRag},
}};

struct PairwiseResult {
  Condition first = Condition::AgentNoRag;
  Condition second = Condition::LlmOnly;
  /// Mann-Whitney U of the first sample.
  double u = 0.0;
  double p_raw = 1.0;
  double p_holm = 1.0;
  bool exact = false;
  /// Sign of median(first) - median(second): -1, 0 or +1.
  int direction = 0;
};

struct DescriptiveRow {
  std::string model;
  AgentRole agent;
  Condition condition;
  stats::DescriptiveStats stats;
};

struct OutcomeRow {
  std::string model;
  AgentRole agent;
  Condition condition;
  std::size_t successes = 0;
  std::size_t failures = 0;
};

struct PanelResult {
  std::string model;
  AgentRole agent;
  stats::OmnibusResult omnibus;
  std::array<PairwiseResult, 3> pairwise;
};

struct ToolUseRow {
  std::string model;
  AgentRole agent;
  std::size_t runs = 0;
  double rate = 0.0;
};

struct ReportBundle {
  std::vector<DescriptiveRow> descriptives;
  std::vector<PanelResult> panels;
  std::vector<ToolUseRow> tool_use;
  std::vector<OutcomeRow> outcomes;
  std::vector<std::string> embed_models;
};

class AnalysisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Descriptives, Kruskal-Wallis and Holm-corrected pairwise tests per
/// (model, agent) panel, plus tool-use rates for AgentRag cells. Models
/// appear in order of first occurrence. Throws AnalysisError naming a panel
/// that lacks a condition with at least two successful runs.
ReportBundle analyze(std::span<const RunRecord> records);

ReportBundle analyze_results(const std::filesystem::path& results_file);

nlohmann::json to_json(const ReportBundle& bundle);

}  // namespace fairaudit::runner
