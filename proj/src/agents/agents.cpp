#include "fairaudit/agents/agents.hpp"

#include <cstdio>
#include <functional>
#include <stdexcept>

#include "fairaudit/agents/structured.hpp"

namespace fairaudit::agents {

using gateway::ChatMessage;
using gateway::Role;
using gateway::ToolSchema;

namespace {

struct ToolBinding {
  ToolSchema schema;
  const rag::VectorIndex* index = nullptr;
  bool diverse = false;
};

ToolBinding literature_tool(const rag::VectorIndex* index) {
  return {{kSearchLiteratureTool,
           "Search the curated journal-article corpus for passages relevant to a query. "
           "Results come from distinct articles where possible.",
           {{"query", "What to search for, in natural language."}}},
          index,
          true};
}

ToolBinding metrics_tool(const rag::VectorIndex* index) {
  return {{kLookupMetricsTool,
           "Look up formal definitions in the curated fairness metric library.",
           {{"query", "The kind of harm, error type or metric to look up."}}},
          index,
          false};
}

std::string run_tool(const AgentContext& ctx, const ToolBinding& tool,
                     const gateway::ToolCall& call, AgentTrace& trace) {
  auto q = call.arguments.find("query");
  if (q == call.arguments.end() || !q->is_string() || q->get<std::string>().empty()) {
    return "error: the 'query' argument must be a nonempty string";
  }
  const std::string query = q->get<std::string>();
  const auto embedding = ctx.gateway.embed_one(ctx.rag_embed_model, query);
  const auto k = static_cast<std::size_t>(ctx.rag.top_k);
  auto hits = tool.diverse
                  ? tool.index->search_diverse(embedding, k,
                                               static_cast<std::size_t>(ctx.rag.per_source_cap))
                  : tool.index->search(embedding, k);
  std::string text = format_passages(*tool.index, hits);
  trace.tool_invocations.push_back({tool.schema.name, query, std::move(hits)});
  return text;
}

/// Chat loop shared by both agents: tool rounds, optional repair, parse.
template <typename Output>
AgentResult<Output> run_agent(const AgentContext& ctx, AgentRole role, Condition condition,
                              std::vector<ChatMessage> messages,
                              std::optional<ToolBinding> tool,
                              const std::function<Output(std::string_view)>& parse) {
  AgentResult<Output> result;
  AgentTrace& trace = result.trace;
  trace.role = role;
  trace.condition = condition;
  trace.model = ctx.model.name;
  trace.tools_offered = tool.has_value();

  auto chat = [&](bool offer_tools) {
    ++trace.chat_calls;
    if (offer_tools) {
      return ctx.gateway.chat(ctx.model, messages, std::span<const ToolSchema>(&tool->schema, 1));
    }
    return ctx.gateway.chat(ctx.model, messages);
  };

  gateway::ChatResponse reply;
  for (int round = 0;; ++round) {
    const bool offer = tool.has_value() && round < kMaxToolRounds;
    reply = chat(offer);
    if (!offer || reply.tool_calls.empty()) break;
    ChatMessage assistant{Role::Assistant, reply.content};
    assistant.tool_calls = reply.tool_calls;
    messages.push_back(std::move(assistant));
    for (const auto& call : reply.tool_calls) {
      std::string content = call.name == tool->schema.name
                                ? run_tool(ctx, *tool, call, trace)
                                : "error: unknown tool '" + call.name + "'";
      ChatMessage tool_msg{Role::Tool, std::move(content)};
      tool_msg.tool_name = call.name;
      messages.push_back(std::move(tool_msg));
    }
  }

  const int max_attempts = condition == Condition::LlmOnly ? 1 : 2;
  for (int attempt = 1;; ++attempt) {
    trace.parse_attempts = attempt;
    trace.raw_text = reply.content;
    try {
      result.output = parse(reply.content);
      trace.succeeded = true;
      trace.error.clear();
      return result;
    } catch (const StructuredOutputError& e) {
      trace.error = e.what();
      if (attempt >= max_attempts) return result;
    }
    messages.push_back({Role::Assistant, reply.content.empty() ? "(empty reply)" : reply.content});
    messages.push_back(
        ChatMessage::user(render_template(ctx.prompts.repair, {{"error", trace.error}})));
    reply = chat(false);
  }
}

}  // namespace

std::string format_passages(const rag::VectorIndex& index,
                            const std::vector<rag::RetrievalResult>& hits) {
  if (hits.empty()) return "No passages found.";
  std::string text;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    char header[64];
    std::snprintf(header, sizeof header, "[%zu] score=%.4f ", i + 1, hits[i].score);
    if (!text.empty()) text += "\n\n";
    text += header;
    text += "source=" + hits[i].source_id + " chunk=" + hits[i].chunk_id + "\n";
    text += index.chunk(hits[i].chunk_id).text;
  }
  return text;
}

AgentResult<DomainExpertOutput> run_domain_expert(const AgentContext& ctx,
                                                  const std::string& clinical_context,
                                                  Condition condition,
                                                  const rag::VectorIndex* corpus_index) {
  std::optional<ToolBinding> tool;
  if (condition == Condition::AgentRag) {
    if (!corpus_index) throw std::invalid_argument("AgentRag requires a corpus index");
    tool = literature_tool(corpus_index);
  }
  return run_agent<DomainExpertOutput>(ctx, AgentRole::DomainExpert, condition,
                                       domain_expert_messages(ctx.prompts, clinical_context, condition),
                                       tool, parse_domain_expert_output);
}

AgentResult<FairnessConsultantOutput> run_fairness_consultant(
    const AgentContext& ctx, const DomainExpertOutput& findings, Condition condition,
    const rag::VectorIndex* library_index) {
  std::optional<ToolBinding> tool;
  if (condition == Condition::AgentRag) {
    if (!library_index) throw std::invalid_argument("AgentRag requires a fairness library index");
    tool = metrics_tool(library_index);
  }
  return run_agent<FairnessConsultantOutput>(
      ctx, AgentRole::FairnessConsultant, condition,
      fairness_consultant_messages(ctx.prompts, findings, condition), tool,
      parse_fairness_consultant_output);
}

}  // namespace fairaudit::agents
