#include "fairaudit/core/plan.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "fairaudit/util/digest.hpp"

namespace fairaudit {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Condition condition) {
  switch (condition) {
    case Condition::LlmOnly: return "llm_only";
    case Condition::AgentNoRag: return "agent_no_rag";
    case Condition::AgentRag: return "agent_rag";
  }
  return "unknown";
}

std::string_view to_string(AgentRole role) {
  return role == AgentRole::DomainExpert ? "agent1" : "agent2";
}

std::string_view display_label(Condition condition) {
  switch (condition) {
    case Condition::LlmOnly: return "LLM";
    case Condition::AgentNoRag: return "Agent (NR)";
    case Condition::AgentRag: return "Agent (R)";
  }
  return "?";
}

std::string_view display_label(AgentRole role) {
  return role == AgentRole::DomainExpert ? "Agent 1" : "Agent 2";
}

std::optional<Condition> parse_condition(std::string_view text) {
  for (Condition c : kAllConditions) {
    if (to_string(c) == text) return c;
  }
  return std::nullopt;
}

std::optional<AgentRole> parse_agent_role(std::string_view text) {
  for (AgentRole r : kAllRoles) {
    if (to_string(r) == text) return r;
  }
  return std::nullopt;
}

namespace {

constexpr const char* kDefaultEmbedModel = "mxbai-embed-large";

const std::set<std::string> kTopLevelKeys = {
    "schema_version", "models",          "conditions",       "repetitions",
    "clinical_context", "corpus_dir",    "fairness_library_path", "prompts_dir",
    "ground_truth",   "eval_embed_model", "rag_embed_model", "rag",
    "output_dir",     "master_seed",     "server_url"};

const json& require(const json& obj, const std::string& key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) throw PlanError(path, "missing required field");
  return *it;
}

std::string require_string(const json& obj, const std::string& key, const std::string& path,
                           bool nonempty = true) {
  const json& v = require(obj, key, path);
  if (!v.is_string()) throw PlanError(path, "expected a string");
  auto s = v.get<std::string>();
  if (nonempty && s.empty()) throw PlanError(path, "must be nonempty");
  return s;
}

std::optional<std::string> optional_string(const json& obj, const std::string& key,
                                           const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw PlanError(path, "expected a string");
  return it->get<std::string>();
}

template <typename Int>
Int integer_or(const json& obj, const std::string& key, const std::string& path, Int fallback) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  if (!it->is_number_integer()) throw PlanError(path, "expected an integer");
  return it->get<Int>();
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  if (path.is_relative()) path = base / path;
  return path.lexically_normal();
}

ModelSpec parse_model(const json& v, const std::string& path) {
  ModelSpec m;
  if (v.is_string()) {
    m.name = v.get<std::string>();
  } else if (v.is_object()) {
    m.name = require_string(v, "name", path + ".name", false);
    if (auto it = v.find("temperature"); it != v.end() && !it->is_null()) {
      if (!it->is_number()) throw PlanError(path + ".temperature", "expected a number");
      m.temperature = it->get<double>();
    }
    if (auto it = v.find("seed"); it != v.end() && !it->is_null()) {
      if (!it->is_number_integer()) throw PlanError(path + ".seed", "expected an integer");
      m.seed = it->get<std::int64_t>();
    }
  } else {
    throw PlanError(path, "expected a model object or tag string");
  }
  if (m.name.empty()) throw PlanError(path + ".name", "must be nonempty");
  if (!(m.temperature >= 0.0)) throw PlanError(path + ".temperature", "must be >= 0");
  return m;
}

}  // namespace

ExperimentPlan parse_plan(const json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) throw PlanError("<root>", "plan must be a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (!kTopLevelKeys.contains(key)) throw PlanError(key, "unknown field");
  }

  ExperimentPlan plan;
  plan.schema_version = integer_or<int>(doc, "schema_version", "schema_version", kPlanSchemaVersion);
  if (plan.schema_version != kPlanSchemaVersion) {
    throw PlanError("schema_version",
                    "unsupported version " + std::to_string(plan.schema_version));
  }

  const json& models = require(doc, "models", "models");
  if (!models.is_array() || models.empty()) throw PlanError("models", "must be a nonempty list");
  std::set<std::string> seen_models;
  for (std::size_t i = 0; i < models.size(); ++i) {
    const std::string path = "models[" + std::to_string(i) + "]";
    ModelSpec m = parse_model(models[i], path);
    if (!seen_models.insert(m.name).second) throw PlanError(path + ".name", "duplicate model");
    plan.models.push_back(std::move(m));
  }

  if (auto it = doc.find("conditions"); it != doc.end() && !it->is_null()) {
    if (!it->is_array() || it->empty()) throw PlanError("conditions", "must be a nonempty list");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string path = "conditions[" + std::to_string(i) + "]";
      const json& c = (*it)[i];
      auto parsed = c.is_string() ? parse_condition(c.get<std::string>()) : std::nullopt;
      if (!parsed) throw PlanError(path, "expected one of llm_only, agent_no_rag, agent_rag");
      for (Condition existing : plan.conditions) {
        if (existing == *parsed) throw PlanError(path, "duplicate condition");
      }
      plan.conditions.push_back(*parsed);
    }
  } else {
    plan.conditions.assign(kAllConditions.begin(), kAllConditions.end());
  }

  plan.repetitions = integer_or<int>(doc, "repetitions", "repetitions", 100);
  if (plan.repetitions < 1) throw PlanError("repetitions", "must be >= 1");

  plan.clinical_context = require_string(doc, "clinical_context", "clinical_context");
  plan.corpus_dir = resolve(base_dir, require_string(doc, "corpus_dir", "corpus_dir"));
  plan.fairness_library_path =
      resolve(base_dir, require_string(doc, "fairness_library_path", "fairness_library_path"));
  if (auto p = optional_string(doc, "prompts_dir", "prompts_dir"); p && !p->empty()) {
    plan.prompts_dir = resolve(base_dir, *p);
  }

  const json& gt = require(doc, "ground_truth", "ground_truth");
  if (!gt.is_object()) throw PlanError("ground_truth", "expected an object");
  plan.ground_truth.agent1_text = require_string(gt, "agent1_text", "ground_truth.agent1_text");
  plan.ground_truth.agent2_text = require_string(gt, "agent2_text", "ground_truth.agent2_text");

  plan.rag_embed_model =
      optional_string(doc, "rag_embed_model", "rag_embed_model").value_or(kDefaultEmbedModel);
  if (plan.rag_embed_model.empty()) throw PlanError("rag_embed_model", "must be nonempty");
  plan.eval_embed_model =
      optional_string(doc, "eval_embed_model", "eval_embed_model").value_or(plan.rag_embed_model);
  if (plan.eval_embed_model.empty()) throw PlanError("eval_embed_model", "must be nonempty");

  if (auto it = doc.find("rag"); it != doc.end() && !it->is_null()) {
    if (!it->is_object()) throw PlanError("rag", "expected an object");
    for (const auto& [key, _] : it->items()) {
      if (key != "top_k" && key != "per_source_cap" && key != "chunk_size" &&
          key != "chunk_overlap") {
        throw PlanError("rag." + key, "unknown field");
      }
    }
    plan.rag.top_k = integer_or<int>(*it, "top_k", "rag.top_k", plan.rag.top_k);
    plan.rag.per_source_cap =
        integer_or<int>(*it, "per_source_cap", "rag.per_source_cap", plan.rag.per_source_cap);
    plan.rag.chunk_size = integer_or<int>(*it, "chunk_size", "rag.chunk_size", plan.rag.chunk_size);
    plan.rag.chunk_overlap =
        integer_or<int>(*it, "chunk_overlap", "rag.chunk_overlap", plan.rag.chunk_overlap);
  }
  if (plan.rag.top_k < 1) throw PlanError("rag.top_k", "must be >= 1");
  if (plan.rag.per_source_cap < 1) throw PlanError("rag.per_source_cap", "must be >= 1");
  if (plan.rag.chunk_size < 1) throw PlanError("rag.chunk_size", "must be >= 1");
  if (plan.rag.chunk_overlap < 0) throw PlanError("rag.chunk_overlap", "must be >= 0");
  if (plan.rag.chunk_overlap >= plan.rag.chunk_size) {
    throw PlanError("rag.chunk_overlap", "must be smaller than rag.chunk_size");
  }

  plan.output_dir = resolve(base_dir, require_string(doc, "output_dir", "output_dir"));
  plan.master_seed = integer_or<std::int64_t>(doc, "master_seed", "master_seed", 0);
  plan.server_url = optional_string(doc, "server_url", "server_url");
  return plan;
}

ExperimentPlan load_plan(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw PlanError("<file>", "cannot open plan file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw PlanError("<file>", std::string("malformed JSON: ") + e.what());
  }
  fs::path base = path.parent_path();
  if (base.empty()) base = ".";
  return parse_plan(doc, fs::absolute(base));
}

json to_json(const ExperimentPlan& plan) {
  json models = json::array();
  for (const auto& m : plan.models) {
    models.push_back({{"name", m.name},
                      {"temperature", m.temperature},
                      {"seed", m.seed ? json(*m.seed) : json(nullptr)}});
  }
  json conditions = json::array();
  for (Condition c : plan.conditions) conditions.push_back(std::string(to_string(c)));

  return json{
      {"schema_version", plan.schema_version},
      {"models", models},
      {"conditions", conditions},
      {"repetitions", plan.repetitions},
      {"clinical_context", plan.clinical_context},
      {"corpus_dir", plan.corpus_dir.string()},
      {"fairness_library_path", plan.fairness_library_path.string()},
      {"prompts_dir", plan.prompts_dir.empty() ? json(nullptr) : json(plan.prompts_dir.string())},
      {"ground_truth",
       {{"agent1_text", plan.ground_truth.agent1_text},
        {"agent2_text", plan.ground_truth.agent2_text}}},
      {"eval_embed_model", plan.eval_embed_model},
      {"rag_embed_model", plan.rag_embed_model},
      {"rag",
       {{"top_k", plan.rag.top_k},
        {"per_source_cap", plan.rag.per_source_cap},
        {"chunk_size", plan.rag.chunk_size},
        {"chunk_overlap", plan.rag.chunk_overlap}}},
      {"output_dir", plan.output_dir.string()},
      {"master_seed", plan.master_seed},
      {"server_url", plan.server_url ? json(*plan.server_url) : json(nullptr)},
  };
}

void check_paths_exist(const ExperimentPlan& plan) {
  if (!fs::is_directory(plan.corpus_dir)) {
    throw PlanError("corpus_dir", "not a directory: " + plan.corpus_dir.string());
  }
  if (!fs::is_regular_file(plan.fairness_library_path)) {
    throw PlanError("fairness_library_path",
                    "not a file: " + plan.fairness_library_path.string());
  }
  if (!plan.prompts_dir.empty() && !fs::is_directory(plan.prompts_dir)) {
    throw PlanError("prompts_dir", "not a directory: " + plan.prompts_dir.string());
  }
}

std::int64_t derive_run_seed(std::int64_t master_seed, std::string_view model,
                             Condition condition, int repetition) {
  std::ostringstream key;
  key << master_seed << '\x1f' << model << '\x1f' << to_string(condition) << '\x1f'
      << repetition;
  return static_cast<std::int64_t>(util::sha256_u64(key.str()) & 0x7fffffffULL);
}

}  // namespace fairaudit
