#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "fairaudit/agents/outputs.hpp"
#include "fairaudit/core/model.hpp"
#include "fairaudit/gateway/messages.hpp"

namespace fairaudit::agents {

/// Prompt templates with `{{name}}` placeholders. One file per field, named
/// after the field with a .txt suffix (e.g. domain_expert_task.txt).
struct PromptSet {
  std::string domain_expert_system;
  std::string domain_expert_tools;
  std::string domain_expert_task;  // {{clinical_context}}
  std::string fairness_consultant_system;
  std::string fairness_consultant_tools;
  std::string fairness_consultant_task;  // {{disparity_drivers}}, {{summary}}
  std::string repair;                    // {{error}}

  /// SHA-256 over every template the role can use.
  std::string digest(AgentRole role) const;

  bool operator==(const PromptSet&) const = default;
};

/// Templates compiled in from data/prompts.
PromptSet default_prompts();

/// Reads every template from `dir`. Throws std::runtime_error naming a missing file.
PromptSet load_prompts(const std::filesystem::path& dir);

/// Substitutes `{{key}}` placeholders. Throws std::invalid_argument for a
/// placeholder without a value.
std::string render_template(const std::string& tmpl, const std::map<std::string, std::string>& vars);

/// Opening messages for Agent 1. LlmOnly gets the task alone; the agent
/// conditions add the persona, and AgentRag the tool instructions.
std::vector<gateway::ChatMessage> domain_expert_messages(const PromptSet& prompts,
                                                         const std::string& clinical_context,
                                                         Condition condition);

/// Opening messages for Agent 2; the task embeds Agent 1's drivers and summary verbatim.
std::vector<gateway::ChatMessage> fairness_consultant_messages(const PromptSet& prompts,
                                                               const DomainExpertOutput& findings,
                                                               Condition condition);

}  // namespace fairaudit::agents
