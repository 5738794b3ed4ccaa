#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairaudit/agents/outputs.hpp"
#include "fairaudit/core/model.hpp"
#include "fairaudit/eval/similarity.hpp"

namespace fairaudit::runner {

inline constexpr int kResultsSchemaVersion = 1;

template <typename Output>
struct AgentRecord {
  /// Empty when parsing failed; such runs are tallied, not scored.
  std::optional<Output> output;
  /// The text compared against the ground truth.
  std::string evaluated_text;
  std::optional<eval::SimilarityScore> similarity;
  agents::AgentTrace trace;

  bool succeeded() const { return output.has_value(); }
  bool operator==(const AgentRecord&) const = default;
};

/// One full pipeline pass (Agent 1 then Agent 2) for one cell repetition.
struct RunRecord {
  int schema_version = kResultsSchemaVersion;
  std::string run_id;
  std::string model;
  Condition condition = Condition::LlmOnly;
  int repetition = 0;
  std::int64_t seed = 0;
  AgentRecord<agents::DomainExpertOutput> agent1;
  /// Absent when Agent 1 failed.
  std::optional<AgentRecord<agents::FairnessConsultantOutput>> agent2;
  std::array<std::string, 2> prompt_hashes;
  std::string started_at;
  std::string finished_at;

  bool operator==(const RunRecord&) const = default;
};

class ResultsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string make_run_id(const std::string& model, Condition condition, int repetition);

nlohmann::json to_json(const RunRecord& record);
RunRecord record_from_json(const nlohmann::json& j);

/// One compact JSON document, no trailing newline.
std::string to_json_line(const RunRecord& record);

/// Reads a JSON-lines results file. Blank lines are ignored. Throws
/// ResultsError naming the line for malformed content.
std::vector<RunRecord> read_results(const std::filesystem::path& path);

}  // namespace fairaudit::runner
