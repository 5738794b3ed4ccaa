#include "fairaudit/gateway/mock_transport.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "fairaudit/util/digest.hpp"

namespace fairaudit::gateway {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw GatewayError(ErrorKind::NoFixture, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw GatewayError(ErrorKind::NoFixture, path.string() + ": " + e.what());
  }
}

std::vector<std::string> string_list(const json& v, const std::string& what) {
  if (!v.is_array()) throw GatewayError(ErrorKind::NoFixture, what + " must be a list");
  std::vector<std::string> out;
  for (const auto& s : v) {
    if (!s.is_string()) throw GatewayError(ErrorKind::NoFixture, what + " must hold strings");
    out.push_back(s.get<std::string>());
  }
  return out;
}

MockReply parse_reply(const json& r) {
  MockReply reply;
  if (r.is_string()) {
    reply.content = r.get<std::string>();
    return reply;
  }
  reply.content = r.value("content", "");
  if (auto calls = r.find("tool_calls"); calls != r.end()) {
    for (const auto& c : *calls) {
      reply.tool_calls.push_back({c.at("name").get<std::string>(),
                                  c.value("arguments", json::object())});
    }
  }
  return reply;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

MockFixtures parse_mock_fixtures(const json& chat, const json& embed) {
  MockFixtures fx;
  if (!chat.is_null()) {
    for (const auto& r : chat.at("rules")) {
      MockRule rule;
      rule.name = r.value("name", "");
      if (r.contains("message_digest")) rule.message_digest = r["message_digest"].get<std::string>();
      if (r.contains("model")) rule.model = r["model"].get<std::string>();
      if (r.contains("roles")) rule.roles = string_list(r["roles"], "roles");
      if (r.contains("tools")) {
        auto tools = string_list(r["tools"], "tools");
        std::sort(tools.begin(), tools.end());
        rule.tools = std::move(tools);
      }
      if (r.contains("first_message_contains")) {
        rule.first_message_contains = r["first_message_contains"].get<std::string>();
      }
      for (const auto& reply : r.at("replies")) rule.replies.push_back(parse_reply(reply));
      if (rule.replies.empty()) {
        throw GatewayError(ErrorKind::NoFixture, "rule '" + rule.name + "' has no replies");
      }
      fx.rules.push_back(std::move(rule));
    }
  }
  if (!embed.is_null()) {
    fx.embed.dim = embed.value("dim", fx.embed.dim);
    fx.embed.scale = embed.value("scale", fx.embed.scale);
    if (auto v = embed.find("vectors"); v != embed.end()) {
      for (const auto& [text, vec] : v->items()) {
        fx.embed.vectors[text] = vec.get<std::vector<double>>();
      }
    }
  }
  if (fx.embed.dim == 0) throw GatewayError(ErrorKind::NoFixture, "embed dim must be positive");
  return fx;
}

MockFixtures load_mock_fixtures(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw GatewayError(ErrorKind::NoFixture, "mock fixtures directory not found: " + dir.string());
  }
  json chat = fs::exists(dir / "chat.json") ? read_json_file(dir / "chat.json") : json(nullptr);
  json embed = fs::exists(dir / "embed.json") ? read_json_file(dir / "embed.json") : json(nullptr);
  return parse_mock_fixtures(chat, embed);
}

std::string message_digest(const json& messages) {
  return util::sha256_hex(messages.dump(-1, ' ', false, json::error_handler_t::replace));
}

std::vector<double> hashed_bow_embedding(std::string_view text, std::size_t dim) {
  std::vector<double> v(dim, 0.0);
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    v[fnv1a(token) % dim] += 1.0;
    token.clear();
  };
  for (unsigned char c : text) {
    if (std::isalnum(c) || c >= 0x80) {
      token.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  if (std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; })) v[0] = 1.0;
  return v;
}

MockTransport::MockTransport(MockFixtures fixtures) : fixtures_(std::move(fixtures)) {}

json MockTransport::post(std::string_view endpoint, const json& body) {
  if (endpoint == kChatEndpoint) return chat(body);
  if (endpoint == kEmbedEndpoint) return embed(body);
  throw GatewayError(ErrorKind::HttpStatus, "404 mock has no endpoint " + std::string(endpoint));
}

json MockTransport::chat(const json& body) const {
  const json& messages = body.at("messages");
  const std::string model = body.at("model").get<std::string>();
  const std::string digest = message_digest(messages);

  std::vector<std::string> roles;
  for (const auto& m : messages) roles.push_back(m.at("role").get<std::string>());
  std::vector<std::string> tools;
  if (auto t = body.find("tools"); t != body.end()) {
    for (const auto& tool : *t) tools.push_back(tool.at("function").at("name").get<std::string>());
  }
  std::sort(tools.begin(), tools.end());
  const std::string first_content =
      messages.empty() ? std::string() : messages.front().value("content", "");

  std::uint64_t seed = 0;
  if (auto o = body.find("options"); o != body.end() && o->contains("seed")) {
    seed = static_cast<std::uint64_t>((*o)["seed"].get<std::int64_t>());
  }

  for (const auto& rule : fixtures_.rules) {
    if (rule.message_digest && *rule.message_digest != digest) continue;
    if (rule.model && *rule.model != model) continue;
    if (rule.roles && *rule.roles != roles) continue;
    if (rule.tools && *rule.tools != tools) continue;
    if (rule.first_message_contains &&
        first_content.find(*rule.first_message_contains) == std::string::npos) {
      continue;
    }
    const MockReply& reply = rule.replies[seed % rule.replies.size()];
    json message = {{"role", "assistant"}, {"content", reply.content}};
    if (!reply.tool_calls.empty()) {
      json calls = json::array();
      for (const auto& c : reply.tool_calls) {
        calls.push_back({{"function", {{"name", c.name}, {"arguments", c.arguments}}}});
      }
      message["tool_calls"] = std::move(calls);
    }
    return {{"model", model}, {"message", message}, {"done", true}};
  }

  std::string role_seq;
  for (const auto& r : roles) role_seq += (role_seq.empty() ? "" : ",") + r;
  throw GatewayError(ErrorKind::NoFixture, "no chat fixture for roles [" + role_seq +
                                               "], message_digest " + digest);
}

json MockTransport::embed(const json& body) const {
  json out = json::array();
  for (const auto& t : body.at("input")) {
    const std::string text = t.get<std::string>();
    std::vector<double> v;
    if (auto it = fixtures_.embed.vectors.find(text); it != fixtures_.embed.vectors.end()) {
      v = it->second;
    } else {
      v = hashed_bow_embedding(text, fixtures_.embed.dim);
    }
    for (double& x : v) x *= fixtures_.embed.scale;
    out.push_back(std::move(v));
  }
  return {{"model", body.at("model")}, {"embeddings", out}};
}

}  // namespace fairaudit::gateway
