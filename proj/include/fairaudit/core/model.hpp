#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace fairaudit {

/// Inference-server model tag plus sampling settings for one ablation cell.
struct ModelSpec {
  std::string name;
  double temperature = 0.2;
  std::optional<std::int64_t> seed;

  bool operator==(const ModelSpec&) const = default;
};

enum class Condition { LlmOnly, AgentNoRag, AgentRag };

inline constexpr std::array<Condition, 3> kAllConditions = {
    Condition::LlmOnly, Condition::AgentNoRag, Condition::AgentRag};

enum class AgentRole { DomainExpert, FairnessConsultant };

inline constexpr std::array<AgentRole, 2> kAllRoles = {AgentRole::DomainExpert,
                                                       AgentRole::FairnessConsultant};

/// Machine identifiers used in plan files, results and CSV exports.
std::string_view to_string(Condition condition);
std::string_view to_string(AgentRole role);

/// Human-facing labels used in rendered tables: "LLM", "Agent (NR)", "Agent (R)".
std::string_view display_label(Condition condition);
/// "Agent 1" / "Agent 2".
std::string_view display_label(AgentRole role);

/// Parses a machine identifier; returns nullopt for unknown input.
std::optional<Condition> parse_condition(std::string_view text);
std::optional<AgentRole> parse_agent_role(std::string_view text);

struct GroundTruth {
  std::string agent1_text;
  std::string agent2_text;

  bool operator==(const GroundTruth&) const = default;

  const std::string& for_role(AgentRole role) const {
    return role == AgentRole::DomainExpert ? agent1_text : agent2_text;
  }
};

struct RagParams {
  int top_k = 6;
  int per_source_cap = 1;
  int chunk_size = 1200;
  int chunk_overlap = 200;

  bool operator==(const RagParams&) const = default;
};

}  // namespace fairaudit
