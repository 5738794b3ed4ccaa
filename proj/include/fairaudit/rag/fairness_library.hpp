#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairaudit/rag/chunker.hpp"

namespace fairaudit::rag {

enum class HarmMode { MissedPositives, FalsePositives, Both, Calibration };

std::string_view to_string(HarmMode mode);
std::optional<HarmMode> parse_harm_mode(std::string_view text);

struct FairnessMetricEntry {
  std::string name;
  std::string definition;
  std::string formalization;
  std::string appropriate_when;
  HarmMode harm_mode = HarmMode::Both;
};

/// Reads a library file: {"schema_version": 1, "metrics": [ {...}, ... ]}.
/// Names are compared case-insensitively for uniqueness.
std::vector<FairnessMetricEntry> load_fairness_library(const std::filesystem::path& path);
std::vector<FairnessMetricEntry> parse_fairness_library(const nlohmann::json& doc);

/// Plain-text card handed to the model when the entry is retrieved.
std::string render_metric_card(const FairnessMetricEntry& entry);

/// One chunk per metric; the source id is a slug of the metric name.
std::vector<Chunk> library_chunks(const std::vector<FairnessMetricEntry>& entries);

}  // namespace fairaudit::rag
