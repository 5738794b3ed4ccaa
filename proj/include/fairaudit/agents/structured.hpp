#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "fairaudit/agents/outputs.hpp"

namespace fairaudit::agents {

class StructuredOutputError : public std::runtime_error {
 public:
  enum class Kind { NoObject, SchemaViolation };

  StructuredOutputError(Kind kind, std::string field, const std::string& message)
      : std::runtime_error(message), kind_(kind), field_(std::move(field)) {}

  Kind kind() const noexcept { return kind_; }
  /// Offending field for schema violations, empty otherwise.
  const std::string& field() const noexcept { return field_; }

 private:
  Kind kind_;
  std::string field_;
};

/// First balanced JSON object literal in `text`. Fenced code blocks are
/// searched before the surrounding prose.
nlohmann::json extract_json_object(std::string_view text);

/// Schema checks on an already-parsed object.
DomainExpertOutput validate_domain_expert(const nlohmann::json& obj);
FairnessConsultantOutput validate_fairness_consultant(const nlohmann::json& obj);

/// extract_json_object followed by the role's schema check.
DomainExpertOutput parse_domain_expert_output(std::string_view text);
FairnessConsultantOutput parse_fairness_consultant_output(std::string_view text);

/// "Use <metric>: <rationale>." per recommendation, then
/// "Sensitive attributes: <a, b>." in model order.
std::string render_consultant_text(const FairnessConsultantOutput& output);

}  // namespace fairaudit::agents
