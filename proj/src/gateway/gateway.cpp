#include "fairaudit/gateway/gateway.hpp"

#include <set>
#include <thread>

namespace fairaudit::gateway {

using nlohmann::json;

RequestLog::RequestLog(const std::filesystem::path& path) : out_(path, std::ios::app) {
  if (!out_) throw GatewayError(ErrorKind::InvalidRequest, "cannot open request log " + path.string());
}

void RequestLog::write(std::string_view endpoint, const json& request, const json& response) {
  json line = {{"endpoint", std::string(endpoint)}, {"request", request}, {"response", response}};
  std::lock_guard lock(mutex_);
  out_ << line.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
  out_.flush();
}

Gateway::Gateway(std::shared_ptr<Transport> transport, GatewayOptions options)
    : transport_(std::move(transport)), options_(options) {
  if (!transport_) throw GatewayError(ErrorKind::InvalidRequest, "gateway needs a transport");
  if (options_.max_in_flight < 1) options_.max_in_flight = 1;
  if (options_.max_retries < 0) options_.max_retries = 0;
}

std::size_t Gateway::attempt_count() const {
  std::lock_guard lock(slots_mutex_);
  return attempts_;
}

json Gateway::send(std::string_view endpoint, const json& body) {
  for (int attempt = 0;; ++attempt) {
    {
      std::unique_lock lock(slots_mutex_);
      slots_cv_.wait(lock, [&] { return in_flight_ < options_.max_in_flight; });
      ++in_flight_;
      ++attempts_;
    }
    try {
      json response = transport_->post(endpoint, body);
      {
        std::lock_guard lock(slots_mutex_);
        --in_flight_;
      }
      slots_cv_.notify_one();
      if (log_) log_->write(endpoint, body, response);
      return response;
    } catch (const GatewayError& e) {
      {
        std::lock_guard lock(slots_mutex_);
        --in_flight_;
      }
      slots_cv_.notify_one();
      if (e.kind() != ErrorKind::Connection || attempt >= options_.max_retries) throw;
    }
    std::this_thread::sleep_for(options_.retry_backoff);
  }
}

ChatResponse Gateway::chat(const ModelSpec& model, std::span<const ChatMessage> messages,
                           std::span<const ToolSchema> tools) {
  const json body = build_chat_request(model, messages, tools);
  return parse_chat_response(send(kChatEndpoint, body));
}

std::vector<EmbeddingVector> Gateway::embed(std::string_view model,
                                            std::span<const std::string> texts) {
  for (const auto& t : texts) {
    if (t.empty()) throw GatewayError(ErrorKind::InvalidRequest, "cannot embed an empty string");
  }
  std::vector<EmbeddingVector> out(texts.size());
  std::vector<std::string> missing;
  {
    std::lock_guard lock(cache_mutex_);
    std::set<std::string_view> queued;
    for (std::size_t i = 0; i < texts.size(); ++i) {
      auto it = cache_.find(std::pair<std::string, std::string>(model, texts[i]));
      if (it != cache_.end()) {
        out[i] = it->second;
      } else if (queued.insert(texts[i]).second) {
        missing.push_back(texts[i]);
      }
    }
  }
  if (!missing.empty()) {
    auto fresh = parse_embed_response(send(kEmbedEndpoint, build_embed_request(model, missing)),
                                      missing.size());
    std::lock_guard lock(cache_mutex_);
    auto dim_it = model_dims_.find(model);
    if (dim_it == model_dims_.end()) {
      dim_it = model_dims_.emplace(std::string(model), fresh.front().dim()).first;
    } else if (dim_it->second != fresh.front().dim()) {
      throw GatewayError(ErrorKind::DimensionMismatch,
                         std::string(model) + " returned dim " +
                             std::to_string(fresh.front().dim()) + ", earlier " +
                             std::to_string(dim_it->second));
    }
    for (std::size_t j = 0; j < missing.size(); ++j) {
      cache_.emplace(std::make_pair(std::string(model), missing[j]), std::move(fresh[j]));
    }
    for (std::size_t i = 0; i < texts.size(); ++i) {
      if (out[i].values.empty()) {
        out[i] = cache_.at(std::pair<std::string, std::string>(model, texts[i]));
      }
    }
  }
  return out;
}

EmbeddingVector Gateway::embed_one(std::string_view model, const std::string& text) {
  return embed(model, std::span<const std::string>(&text, 1)).front();
}

}  // namespace fairaudit::gateway
