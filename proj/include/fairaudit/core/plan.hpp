#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairaudit/core/model.hpp"

namespace fairaudit {

inline constexpr int kPlanSchemaVersion = 1;

/// Full declarative description of one ablation study.
///
/// Paths are stored resolved against the plan file's directory, so a
/// serialized plan can be reloaded from anywhere.
struct ExperimentPlan {
  int schema_version = kPlanSchemaVersion;
  std::vector<ModelSpec> models;
  std::vector<Condition> conditions;
  int repetitions = 100;
  std::string clinical_context;
  std::filesystem::path corpus_dir;
  std::filesystem::path fairness_library_path;
  /// Empty means the built-in prompt templates are used.
  std::filesystem::path prompts_dir;
  GroundTruth ground_truth;
  std::string eval_embed_model;
  std::string rag_embed_model;
  RagParams rag;
  std::filesystem::path output_dir;
  std::int64_t master_seed = 0;
  /// Inference server base URL; the FAIRAUDIT_BASE_URL environment variable wins.
  std::optional<std::string> server_url;

  bool operator==(const ExperimentPlan&) const = default;

  std::size_t cell_count() const {
    return models.size() * conditions.size() * static_cast<std::size_t>(repetitions);
  }
};

/// Validation failure. `field()` holds the dotted path of the offending field.
class PlanError : public std::runtime_error {
 public:
  PlanError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Reads, defaults and validates a plan file (JSON). Relative paths resolve
/// against the file's directory.
ExperimentPlan load_plan(const std::filesystem::path& path);

/// Same as load_plan for an already-parsed document.
ExperimentPlan parse_plan(const nlohmann::json& doc, const std::filesystem::path& base_dir);

/// Serializes every field, defaulted ones included.
nlohmann::json to_json(const ExperimentPlan& plan);

/// Checks that all referenced input paths exist. Throws PlanError.
void check_paths_exist(const ExperimentPlan& plan);

/// Deterministic per-run seed in [0, 2^31), independent of execution order.
std::int64_t derive_run_seed(std::int64_t master_seed, std::string_view model,
                             Condition condition, int repetition);

}  // namespace fairaudit
