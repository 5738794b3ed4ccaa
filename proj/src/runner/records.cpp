#include "fairaudit/runner/records.hpp"

#include <fstream>

#include "fairaudit/agents/structured.hpp"

namespace fairaudit::runner {

using nlohmann::json;

namespace {

template <typename Output>
json agent_to_json(const AgentRecord<Output>& a) {
  return {{"succeeded", a.succeeded()},
          {"output", a.output ? agents::to_json(*a.output) : json(nullptr)},
          {"evaluated_text", a.evaluated_text},
          {"similarity", a.similarity ? json{{"value", a.similarity->value},
                                             {"embed_model", a.similarity->embed_model}}
                                      : json(nullptr)},
          {"trace", agents::to_json(a.trace)}};
}

template <typename Output, typename Validate>
AgentRecord<Output> agent_from_json(const json& j, Validate validate) {
  AgentRecord<Output> a;
  if (const json& out = j.at("output"); !out.is_null()) a.output = validate(out);
  a.evaluated_text = j.value("evaluated_text", "");
  if (const json& s = j.at("similarity"); !s.is_null()) {
    a.similarity = eval::SimilarityScore{s.at("value").get<double>(),
                                         s.at("embed_model").get<std::string>()};
  }
  a.trace = agents::trace_from_json(j.at("trace"));
  if (a.succeeded() != j.at("succeeded").get<bool>()) {
    throw ResultsError("agent record 'succeeded' disagrees with its output");
  }
  return a;
}

}  // namespace

std::string make_run_id(const std::string& model, Condition condition, int repetition) {
  char rep[16];
  std::snprintf(rep, sizeof rep, "%04d", repetition);
  return model + "/" + std::string(to_string(condition)) + "/" + rep;
}

json to_json(const RunRecord& r) {
  return {{"schema_version", r.schema_version},
          {"run_id", r.run_id},
          {"model", r.model},
          {"condition", std::string(to_string(r.condition))},
          {"repetition", r.repetition},
          {"seed", r.seed},
          {"agent1", agent_to_json(r.agent1)},
          {"agent2", r.agent2 ? agent_to_json(*r.agent2) : json(nullptr)},
          {"prompt_hashes", r.prompt_hashes},
          {"timestamps", {{"start", r.started_at}, {"end", r.finished_at}}}};
}

RunRecord record_from_json(const json& j) {
  RunRecord r;
  r.schema_version = j.at("schema_version").get<int>();
  if (r.schema_version != kResultsSchemaVersion) {
    throw ResultsError("unsupported results schema_version " + std::to_string(r.schema_version));
  }
  r.run_id = j.at("run_id").get<std::string>();
  r.model = j.at("model").get<std::string>();
  auto condition = parse_condition(j.at("condition").get<std::string>());
  if (!condition) throw ResultsError("unknown condition in record " + r.run_id);
  r.condition = *condition;
  r.repetition = j.at("repetition").get<int>();
  r.seed = j.at("seed").get<std::int64_t>();
  r.agent1 = agent_from_json<agents::DomainExpertOutput>(j.at("agent1"), agents::validate_domain_expert);
  if (const json& a2 = j.at("agent2"); !a2.is_null()) {
    if (!r.agent1.succeeded()) throw ResultsError("record " + r.run_id + " has agent2 after a failed agent1");
    r.agent2 = agent_from_json<agents::FairnessConsultantOutput>(
        a2, agents::validate_fairness_consultant);
  }
  r.prompt_hashes = j.at("prompt_hashes").get<std::array<std::string, 2>>();
  r.started_at = j.at("timestamps").at("start").get<std::string>();
  r.finished_at = j.at("timestamps").at("end").get<std::string>();
  return r;
}

std::string to_json_line(const RunRecord& record) {
  return to_json(record).dump(-1, ' ', false, json::error_handler_t::replace);
}

std::vector<RunRecord> read_results(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ResultsError("cannot open results file " + path.string());
  std::vector<RunRecord> records;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(record_from_json(json::parse(line)));
    } catch (const ResultsError& e) {
      throw ResultsError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const std::exception& e) {
      throw ResultsError(path.string() + ":" + std::to_string(lineno) +
                         ": malformed record: " + e.what());
    }
  }
  return records;
}

}  // namespace fairaudit::runner
