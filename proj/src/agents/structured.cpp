#include "fairaudit/agents/structured.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <set>
#include <vector>

namespace fairaudit::agents {

using nlohmann::json;
using Kind = StructuredOutputError::Kind;

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

/// Bodies of ``` fenced blocks, in order. An unclosed fence runs to the end.
std::vector<std::string_view> fenced_blocks(std::string_view text) {
  std::vector<std::string_view> blocks;
  std::size_t pos = 0;
  while ((pos = text.find("```", pos)) != std::string_view::npos) {
    auto body = text.find('\n', pos + 3);
    if (body == std::string_view::npos) break;
    ++body;
    auto close = text.find("```", body);
    if (close == std::string_view::npos) {
      blocks.push_back(text.substr(body));
      break;
    }
    blocks.push_back(text.substr(body, close - body));
    pos = close + 3;
  }
  return blocks;
}

/// End (exclusive) of the object starting at `open`, honoring strings.
std::optional<std::size_t> balanced_end(std::string_view text, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = open; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::nullopt;
}

std::optional<json> first_object(std::string_view text) {
  for (std::size_t open = text.find('{'); open != std::string_view::npos;
       open = text.find('{', open + 1)) {
    auto end = balanced_end(text, open);
    if (!end) continue;
    try {
      json parsed = json::parse(text.substr(open, *end - open));
      if (parsed.is_object()) return parsed;
    } catch (const json::parse_error&) {
    }
  }
  return std::nullopt;
}

std::vector<std::string> string_list(const json& obj, const std::string& field) {
  auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) {
    throw StructuredOutputError(Kind::SchemaViolation, field, "missing field '" + field + "'");
  }
  if (!it->is_array() || it->empty()) {
    throw StructuredOutputError(Kind::SchemaViolation, field,
                                "field '" + field + "' must be a nonempty list of strings");
  }
  std::vector<std::string> out;
  for (const auto& v : *it) {
    if (!v.is_string() || trim(v.get<std::string>()).empty()) {
      throw StructuredOutputError(Kind::SchemaViolation, field,
                                  "field '" + field + "' must contain only nonempty strings");
    }
    out.push_back(trim(v.get<std::string>()));
  }
  return out;
}

std::string nonempty_string(const json& obj, const std::string& field, const std::string& path) {
  auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) {
    throw StructuredOutputError(Kind::SchemaViolation, path, "missing field '" + path + "'");
  }
  if (!it->is_string() || trim(it->get<std::string>()).empty()) {
    throw StructuredOutputError(Kind::SchemaViolation, path,
                                "field '" + path + "' must be a nonempty string");
  }
  return trim(it->get<std::string>());
}

}  // namespace

json extract_json_object(std::string_view text) {
  if (trim(text).empty()) throw StructuredOutputError(Kind::NoObject, "", "empty response");
  for (auto block : fenced_blocks(text)) {
    if (auto obj = first_object(block)) return *obj;
  }
  if (auto obj = first_object(text)) return *obj;
  throw StructuredOutputError(Kind::NoObject, "", "no JSON object found in response");
}

DomainExpertOutput validate_domain_expert(const json& obj) {
  DomainExpertOutput out;
  out.disparity_drivers = string_list(obj, "disparity_drivers");
  out.summary = nonempty_string(obj, "summary", "summary");
  return out;
}

FairnessConsultantOutput validate_fairness_consultant(const json& obj) {
  FairnessConsultantOutput out;
  auto recs = obj.find("recommendations");
  if (recs == obj.end() || recs->is_null()) {
    throw StructuredOutputError(Kind::SchemaViolation, "recommendations",
                                "missing field 'recommendations'");
  }
  if (!recs->is_array() || recs->empty()) {
    throw StructuredOutputError(Kind::SchemaViolation, "recommendations",
                                "field 'recommendations' must be a nonempty list");
  }
  std::set<std::string> seen;
  for (std::size_t i = 0; i < recs->size(); ++i) {
    const json& r = (*recs)[i];
    const std::string path = "recommendations[" + std::to_string(i) + "]";
    if (!r.is_object()) {
      throw StructuredOutputError(Kind::SchemaViolation, path, "'" + path + "' must be an object");
    }
    Recommendation rec{nonempty_string(r, "metric", path + ".metric"),
                       nonempty_string(r, "rationale", path + ".rationale")};
    if (!seen.insert(lower(rec.metric)).second) {
      throw StructuredOutputError(Kind::SchemaViolation, path + ".metric",
                                  "duplicate metric '" + rec.metric + "' in recommendations");
    }
    out.recommendations.push_back(std::move(rec));
  }
  out.sensitive_attributes = string_list(obj, "sensitive_attributes");
  return out;
}

DomainExpertOutput parse_domain_expert_output(std::string_view text) {
  return validate_domain_expert(extract_json_object(text));
}

FairnessConsultantOutput parse_fairness_consultant_output(std::string_view text) {
  return validate_fairness_consultant(extract_json_object(text));
}

std::string render_consultant_text(const FairnessConsultantOutput& output) {
  auto sentence_body = [](std::string s) {
    while (!s.empty() && (s.back() == '.' || std::isspace(static_cast<unsigned char>(s.back())))) {
      s.pop_back();
    }
    return s;
  };
  std::string text;
  for (const auto& r : output.recommendations) {
    if (!text.empty()) text.push_back(' ');
    text += "Use " + r.metric + ": " + sentence_body(r.rationale) + ".";
  }
  std::string attrs;
  for (const auto& a : output.sensitive_attributes) {
    if (!attrs.empty()) attrs += ", ";
    attrs += a;
  }
  if (!text.empty()) text.push_back(' ');
  text += "Sensitive attributes: " + attrs + ".";
  return text;
}

}  // namespace fairaudit::agents
