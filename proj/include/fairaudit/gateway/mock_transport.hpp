#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fairaudit/gateway/messages.hpp"
#include "fairaudit/gateway/transport.hpp"

namespace fairaudit::gateway {

/// One canned assistant reply.
struct MockReply {
  std::string content;
  std::vector<ToolCall> tool_calls;
};

/// A chat fixture. Every criterion that is set must match; the first
/// matching rule wins. Among its replies, index `seed % replies.size()` is
/// returned, where `seed` is the request's options.seed (0 when absent).
struct MockRule {
  std::string name;
  /// Exact match on message_digest() of the request's messages.
  std::optional<std::string> message_digest;
  std::optional<std::string> model;
  /// Role sequence, e.g. {"system", "user", "assistant", "tool"}.
  std::optional<std::vector<std::string>> roles;
  /// Exact set of offered tool names; an empty list means "no tools".
  std::optional<std::vector<std::string>> tools;
  /// Substring of the first message's content.
  std::optional<std::string> first_message_contains;
  std::vector<MockReply> replies;
};

/// Deterministic embedder: explicit vectors for listed texts, otherwise a
/// hashed bag-of-words of lowercase alphanumeric tokens. Every vector is
/// multiplied by `scale`.
struct MockEmbedConfig {
  std::size_t dim = 64;
  double scale = 1.0;
  std::map<std::string, std::vector<double>> vectors;
};

struct MockFixtures {
  std::vector<MockRule> rules;
  MockEmbedConfig embed;
};

/// Reads `chat.json` and `embed.json` from a fixtures directory. Either
/// file may be absent.
MockFixtures load_mock_fixtures(const std::filesystem::path& dir);

MockFixtures parse_mock_fixtures(const nlohmann::json& chat, const nlohmann::json& embed);

/// SHA-256 over the canonical dump of a request's "messages" array.
std::string message_digest(const nlohmann::json& messages);

/// Hashed bag-of-words vector (unscaled); never all-zero.
std::vector<double> hashed_bow_embedding(std::string_view text, std::size_t dim);

class MockTransport final : public Transport {
 public:
  explicit MockTransport(MockFixtures fixtures);

  nlohmann::json post(std::string_view endpoint, const nlohmann::json& body) override;

 private:
  nlohmann::json chat(const nlohmann::json& body) const;
  nlohmann::json embed(const nlohmann::json& body) const;

  MockFixtures fixtures_;
};

}  // namespace fairaudit::gateway
