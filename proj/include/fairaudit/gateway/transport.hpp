#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace fairaudit::gateway {

inline constexpr std::string_view kChatEndpoint = "/api/chat";
inline constexpr std::string_view kEmbedEndpoint = "/api/embed";

enum class ErrorKind {
  Connection,
  Timeout,
  HttpStatus,
  MalformedBody,
  InvalidRequest,
  DimensionMismatch,
  NoFixture,
};

std::string_view to_string(ErrorKind kind);

class GatewayError : public std::runtime_error {
 public:
  GatewayError(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Moves one JSON request body to an endpoint and returns the JSON reply.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual nlohmann::json post(std::string_view endpoint, const nlohmann::json& body) = 0;
};

/// Talks to a local inference server over HTTP.
class HttpTransport final : public Transport {
 public:
  HttpTransport(std::string base_url, std::chrono::seconds timeout = std::chrono::seconds(300));

  nlohmann::json post(std::string_view endpoint, const nlohmann::json& body) override;

  const std::string& base_url() const { return base_url_; }

 private:
  std::string base_url_;
  std::chrono::seconds timeout_;
};

/// Serves responses previously captured by a RequestLog. A request matches
/// when its endpoint and canonical body equal a logged exchange.
class ReplayTransport final : public Transport {
 public:
  explicit ReplayTransport(const std::filesystem::path& log_path);

  nlohmann::json post(std::string_view endpoint, const nlohmann::json& body) override;

  std::size_t size() const { return responses_.size(); }

 private:
  std::map<std::string, nlohmann::json> responses_;
};

/// Canonical key of one exchange: endpoint plus compact body dump.
std::string exchange_key(std::string_view endpoint, const nlohmann::json& body);

}  // namespace fairaudit::gateway
