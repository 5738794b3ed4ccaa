#include "fairaudit/agents/outputs.hpp"

#include <stdexcept>

namespace fairaudit::agents {

using nlohmann::json;

json to_json(const DomainExpertOutput& out) {
  return {{"disparity_drivers", out.disparity_drivers}, {"summary", out.summary}};
}

json to_json(const FairnessConsultantOutput& out) {
  json recs = json::array();
  for (const auto& r : out.recommendations) {
    recs.push_back({{"metric", r.metric}, {"rationale", r.rationale}});
  }
  return {{"recommendations", recs}, {"sensitive_attributes", out.sensitive_attributes}};
}

json to_json(const AgentTrace& trace) {
  json calls = json::array();
  for (const auto& inv : trace.tool_invocations) {
    json hits = json::array();
    for (const auto& r : inv.retrieved) {
      hits.push_back({{"chunk_id", r.chunk_id}, {"source_id", r.source_id}, {"score", r.score}});
    }
    calls.push_back({{"tool_name", inv.tool_name}, {"query_text", inv.query_text}, {"retrieved", hits}});
  }
  return {{"role", std::string(to_string(trace.role))},
          {"condition", std::string(to_string(trace.condition))},
          {"model", trace.model},
          {"tools_offered", trace.tools_offered},
          {"tool_invocations", calls},
          {"raw_text", trace.raw_text},
          {"parse_attempts", trace.parse_attempts},
          {"chat_calls", trace.chat_calls},
          {"succeeded", trace.succeeded},
          {"error", trace.error}};
}

AgentTrace trace_from_json(const json& j) {
  AgentTrace t;
  auto role = parse_agent_role(j.at("role").get<std::string>());
  auto condition = parse_condition(j.at("condition").get<std::string>());
  if (!role || !condition) throw std::invalid_argument("trace has an unknown role or condition");
  t.role = *role;
  t.condition = *condition;
  t.model = j.at("model").get<std::string>();
  t.tools_offered = j.at("tools_offered").get<bool>();
  for (const auto& c : j.at("tool_invocations")) {
    ToolInvocation inv{c.at("tool_name").get<std::string>(), c.at("query_text").get<std::string>(), {}};
    for (const auto& h : c.at("retrieved")) {
      inv.retrieved.push_back({h.at("chunk_id").get<std::string>(),
                               h.at("source_id").get<std::string>(), h.at("score").get<double>()});
    }
    t.tool_invocations.push_back(std::move(inv));
  }
  t.raw_text = j.at("raw_text").get<std::string>();
  t.parse_attempts = j.at("parse_attempts").get<int>();
  t.chat_calls = j.value("chat_calls", 0);
  t.succeeded = j.at("succeeded").get<bool>();
  t.error = j.value("error", "");
  return t;
}

}  // namespace fairaudit::agents
