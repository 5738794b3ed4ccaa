#pragma once

#include <optional>
#include <string>

#include "fairaudit/agents/outputs.hpp"
#include "fairaudit/agents/prompts.hpp"
#include "fairaudit/core/model.hpp"
#include "fairaudit/gateway/gateway.hpp"
#include "fairaudit/rag/vector_index.hpp"

namespace fairaudit::agents {

/// Maximum chat rounds in which tools are offered; a model still asking for
/// tools afterwards gets one more call without tools.
inline constexpr int kMaxToolRounds = 4;

inline constexpr const char* kSearchLiteratureTool = "search_literature";
inline constexpr const char* kLookupMetricsTool = "lookup_fairness_metrics";

/// Everything an agent run needs besides its task input.
struct AgentContext {
  gateway::Gateway& gateway;
  ModelSpec model;
  const PromptSet& prompts;
  RagParams rag;
  std::string rag_embed_model;
};

template <typename Output>
struct AgentResult {
  /// Empty when the reply could not be parsed (trace.succeeded == false).
  std::optional<Output> output;
  AgentTrace trace;
};

/// Agent 1. `corpus_index` is required for Condition::AgentRag and ignored
/// otherwise. Parse failures are reported in the trace; gateway errors throw.
AgentResult<DomainExpertOutput> run_domain_expert(const AgentContext& ctx,
                                                  const std::string& clinical_context,
                                                  Condition condition,
                                                  const rag::VectorIndex* corpus_index);

/// Agent 2, fed Agent 1's output. `library_index` is required for AgentRag.
AgentResult<FairnessConsultantOutput> run_fairness_consultant(
    const AgentContext& ctx, const DomainExpertOutput& findings, Condition condition,
    const rag::VectorIndex* library_index);

/// Tool result text the model sees for a list of hits.
std::string format_passages(const rag::VectorIndex& index,
                            const std::vector<rag::RetrievalResult>& hits);

}  // namespace fairaudit::agents
