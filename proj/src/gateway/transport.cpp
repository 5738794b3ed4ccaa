#include "fairaudit/gateway/transport.hpp"

#include <httplib.h>

#include <fstream>

namespace fairaudit::gateway {

using nlohmann::json;

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Connection: return "connection";
    case ErrorKind::Timeout: return "timeout";
    case ErrorKind::HttpStatus: return "http-status";
    case ErrorKind::MalformedBody: return "malformed-body";
    case ErrorKind::InvalidRequest: return "invalid-request";
    case ErrorKind::DimensionMismatch: return "dimension-mismatch";
    case ErrorKind::NoFixture: return "no-fixture";
  }
  return "unknown";
}

std::string exchange_key(std::string_view endpoint, const json& body) {
  std::string key(endpoint);
  key.push_back('\n');
  key += body.dump(-1, ' ', false, json::error_handler_t::replace);
  return key;
}

HttpTransport::HttpTransport(std::string base_url, std::chrono::seconds timeout)
    : base_url_(std::move(base_url)), timeout_(timeout) {
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

json HttpTransport::post(std::string_view endpoint, const json& body) {
  httplib::Client client(base_url_);
  if (!client.is_valid()) {
    throw GatewayError(ErrorKind::Connection, "invalid base URL " + base_url_);
  }
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(
      std::min(timeout_, std::chrono::seconds(30))));
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);

  const auto started = std::chrono::steady_clock::now();
  auto res = client.Post(std::string(endpoint),
                         body.dump(-1, ' ', false, json::error_handler_t::replace),
                         "application/json");
  if (!res) {
    const auto err = res.error();
    const auto elapsed = std::chrono::steady_clock::now() - started;
    const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                           (err == httplib::Error::Read && elapsed >= timeout_ * 9 / 10);
    throw GatewayError(timed_out ? ErrorKind::Timeout : ErrorKind::Connection,
                       base_url_ + std::string(endpoint) + ": " + httplib::to_string(err));
  }
  if (res->status < 200 || res->status >= 300) {
    throw GatewayError(ErrorKind::HttpStatus, std::to_string(res->status) + " from " + base_url_ +
                                                  std::string(endpoint) + ": " +
                                                  res->body.substr(0, 300));
  }
  try {
    return json::parse(res->body);
  } catch (const json::parse_error& e) {
    throw GatewayError(ErrorKind::MalformedBody, std::string("response is not JSON: ") + e.what());
  }
}

ReplayTransport::ReplayTransport(const std::filesystem::path& log_path) {
  std::ifstream in(log_path);
  if (!in) throw GatewayError(ErrorKind::NoFixture, "cannot open request log " + log_path.string());
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json entry = json::parse(line);
    responses_[exchange_key(entry.at("endpoint").get<std::string>(), entry.at("request"))] =
        entry.at("response");
  }
}

json ReplayTransport::post(std::string_view endpoint, const json& body) {
  auto it = responses_.find(exchange_key(endpoint, body));
  if (it == responses_.end()) {
    throw GatewayError(ErrorKind::NoFixture, "request not present in replay log");
  }
  return it->second;
}

}  // namespace fairaudit::gateway
