#include "fairaudit/rag/fairness_library.hpp"

#include <cctype>
#include <fstream>
#include <set>

namespace fairaudit::rag {

using nlohmann::json;

std::string_view to_string(HarmMode mode) {
  switch (mode) {
    case HarmMode::MissedPositives: return "missed_positives";
    case HarmMode::FalsePositives: return "false_positives";
    case HarmMode::Both: return "both";
    case HarmMode::Calibration: return "calibration";
  }
  return "both";
}

std::optional<HarmMode> parse_harm_mode(std::string_view text) {
  for (HarmMode m : {HarmMode::MissedPositives, HarmMode::FalsePositives, HarmMode::Both,
                     HarmMode::Calibration}) {
    if (to_string(m) == text) return m;
  }
  return std::nullopt;
}

namespace {

std::string normalized_name(const std::string& name) {
  std::string out;
  for (unsigned char c : name) {
    if (std::isspace(c)) {
      if (!out.empty() && out.back() != ' ') out.push_back(' ');
    } else {
      out.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::string slug(const std::string& name) {
  std::string out;
  for (unsigned char c : name) {
    if (std::isalnum(c)) {
      out.push_back(static_cast<char>(std::tolower(c)));
    } else if (!out.empty() && out.back() != '-') {
      out.push_back('-');
    }
  }
  while (!out.empty() && out.back() == '-') out.pop_back();
  return out.empty() ? "metric" : out;
}

std::string required_text(const json& m, const char* field, std::size_t index) {
  auto it = m.find(field);
  if (it == m.end() || !it->is_string() || it->get<std::string>().empty()) {
    throw RagError("fairness library metrics[" + std::to_string(index) + "]: missing field '" +
                   field + "'");
  }
  return it->get<std::string>();
}

}  // namespace

std::vector<FairnessMetricEntry> parse_fairness_library(const json& doc) {
  if (!doc.is_object() || !doc.contains("metrics") || !doc["metrics"].is_array()) {
    throw RagError("fairness library must be an object with a 'metrics' list");
  }
  std::vector<FairnessMetricEntry> out;
  std::set<std::string> names;
  const json& metrics = doc["metrics"];
  for (std::size_t i = 0; i < metrics.size(); ++i) {
    const json& m = metrics[i];
    if (!m.is_object()) throw RagError("fairness library metrics[" + std::to_string(i) + "] is not an object");
    FairnessMetricEntry e;
    e.name = required_text(m, "name", i);
    e.definition = required_text(m, "definition", i);
    e.formalization = required_text(m, "formalization", i);
    e.appropriate_when = required_text(m, "appropriate_when", i);
    const std::string mode = required_text(m, "harm_mode", i);
    auto parsed = parse_harm_mode(mode);
    if (!parsed) throw RagError("fairness library metric '" + e.name + "': unknown harm_mode '" + mode + "'");
    e.harm_mode = *parsed;
    if (!names.insert(normalized_name(e.name)).second) {
      throw RagError("fairness library: duplicate metric name '" + e.name + "'");
    }
    out.push_back(std::move(e));
  }
  if (out.empty()) throw RagError("fairness library has no metrics");
  return out;
}

std::vector<FairnessMetricEntry> load_fairness_library(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw RagError("cannot open fairness library " + path.string());
  try {
    return parse_fairness_library(json::parse(in));
  } catch (const json::parse_error& e) {
    throw RagError("fairness library " + path.string() + " is not valid JSON: " + e.what());
  }
}

std::string render_metric_card(const FairnessMetricEntry& entry) {
  return "Metric: " + entry.name + "\nDefinition: " + entry.definition +
         "\nFormalization: " + entry.formalization + "\nAppropriate when: " +
         entry.appropriate_when + "\nHarm addressed: " + std::string(to_string(entry.harm_mode));
}

std::vector<Chunk> library_chunks(const std::vector<FairnessMetricEntry>& entries) {
  std::vector<Chunk> chunks;
  chunks.reserve(entries.size());
  for (const auto& e : entries) {
    const std::string source = slug(e.name);
    std::string text = render_metric_card(e);
    const std::size_t len = count_code_points(text);
    chunks.push_back({make_chunk_id(source, 0), source, 0, len, std::move(text)});
  }
  return chunks;
}

}  // namespace fairaudit::rag
