#pragma once

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fairaudit/core/model.hpp"
#include "fairaudit/gateway/messages.hpp"
#include "fairaudit/gateway/transport.hpp"

namespace fairaudit::gateway {

struct GatewayOptions {
  /// Retries after the first attempt, only for connection failures.
  int max_retries = 2;
  std::chrono::milliseconds retry_backoff{2000};
  /// Concurrent requests allowed through this gateway.
  int max_in_flight = 2;
};

/// Appends one JSON line per exchange: {"endpoint", "request", "response"}.
class RequestLog {
 public:
  explicit RequestLog(const std::filesystem::path& path);

  void write(std::string_view endpoint, const nlohmann::json& request,
             const nlohmann::json& response);

 private:
  std::mutex mutex_;
  std::ofstream out_;
};

/// Client for chat and embedding calls. Thread-safe.
class Gateway {
 public:
  explicit Gateway(std::shared_ptr<Transport> transport, GatewayOptions options = {});

  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  ChatResponse chat(const ModelSpec& model, std::span<const ChatMessage> messages,
                    std::span<const ToolSchema> tools = {});

  /// One vector per input, order-preserving. Results are cached per
  /// (model, text) for the lifetime of the gateway.
  std::vector<EmbeddingVector> embed(std::string_view model, std::span<const std::string> texts);

  EmbeddingVector embed_one(std::string_view model, const std::string& text);

  void set_request_log(std::shared_ptr<RequestLog> log) { log_ = std::move(log); }

  /// Number of transport attempts made so far, retries included.
  std::size_t attempt_count() const;

 private:
  nlohmann::json send(std::string_view endpoint, const nlohmann::json& body);

  std::shared_ptr<Transport> transport_;
  GatewayOptions options_;
  std::shared_ptr<RequestLog> log_;

  mutable std::mutex slots_mutex_;
  std::condition_variable slots_cv_;
  int in_flight_ = 0;
  std::size_t attempts_ = 0;

  std::mutex cache_mutex_;
  std::map<std::pair<std::string, std::string>, EmbeddingVector, std::less<>> cache_;
  std::map<std::string, std::size_t, std::less<>> model_dims_;
};

}  // namespace fairaudit::gateway
