#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairaudit/core/model.hpp"
#include "fairaudit/rag/vector_index.hpp"

namespace fairaudit::agents {

struct DomainExpertOutput {
  std::vector<std::string> disparity_drivers;
  std::string summary;

  bool operator==(const DomainExpertOutput&) const = default;
};

struct Recommendation {
  std::string metric;
  std::string rationale;

  bool operator==(const Recommendation&) const = default;
};

struct FairnessConsultantOutput {
  std::vector<Recommendation> recommendations;
  std::vector<std::string> sensitive_attributes;

  bool operator==(const FairnessConsultantOutput&) const = default;
};

struct ToolInvocation {
  std::string tool_name;
  std::string query_text;
  std::vector<rag::RetrievalResult> retrieved;

  bool operator==(const ToolInvocation&) const = default;
};

/// What happened during one agent run.
struct AgentTrace {
  AgentRole role = AgentRole::DomainExpert;
  Condition condition = Condition::LlmOnly;
  std::string model;
  bool tools_offered = false;
  std::vector<ToolInvocation> tool_invocations;
  /// Text of the last assistant reply that was parsed.
  std::string raw_text;
  int parse_attempts = 0;
  int chat_calls = 0;
  bool succeeded = false;
  /// Last parse error when !succeeded.
  std::string error;

  bool operator==(const AgentTrace&) const = default;
};

nlohmann::json to_json(const DomainExpertOutput& out);
nlohmann::json to_json(const FairnessConsultantOutput& out);
nlohmann::json to_json(const AgentTrace& trace);

/// Inverse of to_json(AgentTrace); throws nlohmann::json::exception or
/// std::invalid_argument on bad input.
AgentTrace trace_from_json(const nlohmann::json& j);

}  // namespace fairaudit::agents
