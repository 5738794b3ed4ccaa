#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairaudit/core/model.hpp"

namespace fairaudit::gateway {

enum class Role { System, User, Assistant, Tool };

std::string_view to_string(Role role);

struct ToolCall {
  std::string name;
  nlohmann::json arguments = nlohmann::json::object();

  bool operator==(const ToolCall&) const = default;
};

struct ChatMessage {
  Role role = Role::User;
  std::string content;
  std::optional<std::string> tool_call_id;
  /// Name of the tool whose result this message carries (Role::Tool only).
  std::optional<std::string> tool_name;
  /// Calls requested by the assistant (Role::Assistant only).
  std::vector<ToolCall> tool_calls;

  bool operator==(const ChatMessage&) const = default;

  static ChatMessage system(std::string text) {
    ChatMessage m;
    m.role = Role::System;
    m.content = std::move(text);
    return m;
  }
  static ChatMessage user(std::string text) {
    ChatMessage m;
    m.role = Role::User;
    m.content = std::move(text);
    return m;
  }
};

struct ToolParameter {
  std::string name;
  std::string description;
};

/// Function tool with named string parameters, all required.
struct ToolSchema {
  std::string name;
  std::string description;
  std::vector<ToolParameter> parameters;
};

struct ChatResponse {
  std::string content;
  std::vector<ToolCall> tool_calls;
  bool finished = true;
};

struct EmbeddingVector {
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }
  bool operator==(const EmbeddingVector&) const = default;
};

/// Request body for the chat endpoint (model, messages, tools, options).
nlohmann::json build_chat_request(const ModelSpec& model, std::span<const ChatMessage> messages,
                                  std::span<const ToolSchema> tools);

/// Request body for the embeddings endpoint.
nlohmann::json build_embed_request(std::string_view model, std::span<const std::string> texts);

/// Throws GatewayError(MalformedBody) when the body doesn't have the expected shape.
ChatResponse parse_chat_response(const nlohmann::json& body);
std::vector<EmbeddingVector> parse_embed_response(const nlohmann::json& body,
                                                  std::size_t expected_count);

nlohmann::json to_json(const ToolSchema& tool);

}  // namespace fairaudit::gateway
