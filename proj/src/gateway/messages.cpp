#include "fairaudit/gateway/messages.hpp"

#include <set>

#include "fairaudit/gateway/transport.hpp"

namespace fairaudit::gateway {

using nlohmann::json;

std::string_view to_string(Role role) {
  switch (role) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
    case Role::Tool: return "tool";
  }
  return "user";
}

json to_json(const ToolSchema& tool) {
  json properties = json::object();
  json required = json::array();
  for (const auto& p : tool.parameters) {
    properties[p.name] = {{"type", "string"}, {"description", p.description}};
    required.push_back(p.name);
  }
  return {{"type", "function"},
          {"function",
           {{"name", tool.name},
            {"description", tool.description},
            {"parameters",
             {{"type", "object"}, {"properties", properties}, {"required", required}}}}}};
}

json build_chat_request(const ModelSpec& model, std::span<const ChatMessage> messages,
                        std::span<const ToolSchema> tools) {
  if (messages.empty()) throw GatewayError(ErrorKind::InvalidRequest, "messages must be nonempty");

  json msgs = json::array();
  for (const auto& m : messages) {
    if (m.content.empty() && m.tool_calls.empty()) {
      throw GatewayError(ErrorKind::InvalidRequest,
                         "message content must be nonempty unless it carries tool calls");
    }
    json jm = {{"role", std::string(to_string(m.role))}, {"content", m.content}};
    if (m.tool_call_id) jm["tool_call_id"] = *m.tool_call_id;
    if (m.tool_name) jm["tool_name"] = *m.tool_name;
    if (!m.tool_calls.empty()) {
      json calls = json::array();
      for (const auto& c : m.tool_calls) {
        calls.push_back({{"function", {{"name", c.name}, {"arguments", c.arguments}}}});
      }
      jm["tool_calls"] = std::move(calls);
    }
    msgs.push_back(std::move(jm));
  }

  json options = {{"temperature", model.temperature}};
  if (model.seed) options["seed"] = *model.seed;

  json body = {{"model", model.name}, {"messages", msgs}, {"stream", false}, {"options", options}};
  if (!tools.empty()) {
    std::set<std::string> names;
    json jt = json::array();
    for (const auto& t : tools) {
      if (!names.insert(t.name).second) {
        throw GatewayError(ErrorKind::InvalidRequest, "duplicate tool name " + t.name);
      }
      jt.push_back(to_json(t));
    }
    body["tools"] = std::move(jt);
  }
  return body;
}

json build_embed_request(std::string_view model, std::span<const std::string> texts) {
  return {{"model", std::string(model)}, {"input", json(std::vector<std::string>(texts.begin(), texts.end()))}};
}

ChatResponse parse_chat_response(const json& body) {
  auto malformed = [](const std::string& what) {
    return GatewayError(ErrorKind::MalformedBody, "chat response: " + what);
  };
  if (!body.is_object()) throw malformed("not an object");
  auto msg = body.find("message");
  if (msg == body.end() || !msg->is_object()) throw malformed("missing message object");

  ChatResponse out;
  if (auto c = msg->find("content"); c != msg->end() && !c->is_null()) {
    if (!c->is_string()) throw malformed("content is not a string");
    out.content = c->get<std::string>();
  }
  if (auto calls = msg->find("tool_calls"); calls != msg->end() && !calls->is_null()) {
    if (!calls->is_array()) throw malformed("tool_calls is not an array");
    for (const auto& call : *calls) {
      const json* fn = &call;
      if (auto f = call.find("function"); f != call.end()) fn = &*f;
      if (!fn->is_object() || !fn->contains("name") || !(*fn)["name"].is_string()) {
        throw malformed("tool call without a function name");
      }
      ToolCall tc{(*fn)["name"].get<std::string>(), json::object()};
      if (auto a = fn->find("arguments"); a != fn->end() && !a->is_null()) {
        if (a->is_string()) {
          // Some servers send arguments as an encoded JSON string.
          try {
            tc.arguments = json::parse(a->get<std::string>());
          } catch (const json::parse_error&) {
            throw malformed("tool call arguments are not valid JSON");
          }
        } else {
          tc.arguments = *a;
        }
      }
      if (!tc.arguments.is_object()) throw malformed("tool call arguments are not an object");
      out.tool_calls.push_back(std::move(tc));
    }
  }
  if (auto d = body.find("done"); d != body.end() && d->is_boolean()) out.finished = d->get<bool>();
  return out;
}

std::vector<EmbeddingVector> parse_embed_response(const json& body, std::size_t expected_count) {
  auto malformed = [](const std::string& what) {
    return GatewayError(ErrorKind::MalformedBody, "embed response: " + what);
  };
  if (!body.is_object()) throw malformed("not an object");
  auto embs = body.find("embeddings");
  if (embs == body.end() || !embs->is_array()) throw malformed("missing embeddings array");
  if (embs->size() != expected_count) {
    throw malformed("expected " + std::to_string(expected_count) + " vectors, got " +
                    std::to_string(embs->size()));
  }
  std::vector<EmbeddingVector> out;
  out.reserve(embs->size());
  for (const auto& e : *embs) {
    if (!e.is_array() || e.empty()) throw malformed("vector is not a nonempty array");
    EmbeddingVector v;
    v.values.reserve(e.size());
    bool nonzero = false;
    for (const auto& x : e) {
      if (!x.is_number()) throw malformed("non-numeric vector component");
      v.values.push_back(x.get<double>());
      nonzero = nonzero || v.values.back() != 0.0;
    }
    if (!nonzero) throw malformed("all-zero embedding");
    if (!out.empty() && out.front().dim() != v.dim()) {
      throw GatewayError(ErrorKind::DimensionMismatch,
                         "batch mixes dimensions " + std::to_string(out.front().dim()) + " and " +
                             std::to_string(v.dim()));
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace fairaudit::gateway
