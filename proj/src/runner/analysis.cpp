#include "fairaudit/runner/analysis.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "fairaudit/stats/multiple.hpp"
#include "fairaudit/stats/tool_use.hpp"

namespace fairaudit::runner {

using nlohmann::json;

namespace {

struct CellData {
  std::vector<double> scores;
  std::vector<agents::AgentTrace> traces;
  std::size_t successes = 0;
  std::size_t failures = 0;
};

std::string panel_name(const std::string& model, AgentRole agent) {
  return "(" + model + ", " + std::string(to_string(agent)) + ")";
}

}  // namespace

ReportBundle analyze(std::span<const RunRecord> records) {
  std::vector<std::string> models;
  std::map<std::tuple<std::string, AgentRole, Condition>, CellData> cells;
  std::set<std::string> embed_models;

  auto add = [&](const std::string& model, AgentRole role, Condition c, const auto* agent) {
    CellData& cell = cells[{model, role, c}];
    if (agent && agent->succeeded() && agent->similarity) {
      ++cell.successes;
      cell.scores.push_back(agent->similarity->value);
      embed_models.insert(agent->similarity->embed_model);
    } else {
      ++cell.failures;
    }
    if (agent) cell.traces.push_back(agent->trace);
  };

  std::set<std::string> run_ids;
  for (const auto& r : records) {
    if (!run_ids.insert(r.run_id).second) throw AnalysisError("duplicate run_id " + r.run_id);
    if (std::find(models.begin(), models.end(), r.model) == models.end()) models.push_back(r.model);
    add(r.model, AgentRole::DomainExpert, r.condition, &r.agent1);
    add(r.model, AgentRole::FairnessConsultant, r.condition, r.agent2 ? &*r.agent2 : nullptr);
  }

  ReportBundle bundle;
  bundle.embed_models.assign(embed_models.begin(), embed_models.end());
  for (const auto& model : models) {
    for (AgentRole agent : kAllRoles) {
      std::array<std::vector<double>, 3> samples;
      for (std::size_t ci = 0; ci < kAllConditions.size(); ++ci) {
        const Condition c = kAllConditions[ci];
        auto it = cells.find({model, agent, c});
        if (it == cells.end()) {
          throw AnalysisError("panel " + panel_name(model, agent) + " has no " +
                              std::string(to_string(c)) + " runs");
        }
        const CellData& cell = it->second;
        bundle.outcomes.push_back({model, agent, c, cell.successes, cell.failures});
        if (cell.scores.size() < 2) {
          throw AnalysisError("panel " + panel_name(model, agent) + ": condition " +
                              std::string(to_string(c)) + " has " +
                              std::to_string(cell.scores.size()) +
                              " successful run(s); at least 2 are required");
        }
        samples[ci] = cell.scores;
        bundle.descriptives.push_back({model, agent, c, stats::descriptives(cell.scores)});
        if (c == Condition::AgentRag && !cell.traces.empty()) {
          bundle.tool_use.push_back(
              {model, agent, cell.traces.size(), stats::tool_use_rate(cell.traces)});
        }
      }

      PanelResult panel{model, agent, stats::kruskal_wallis(samples), {}};
      std::array<double, 3> raw{};
      for (std::size_t i = 0; i < kPairwiseComparisons.size(); ++i) {
        const auto [first, second] = kPairwiseComparisons[i];
        const auto& x = samples[static_cast<std::size_t>(first)];
        const auto& y = samples[static_cast<std::size_t>(second)];
        const auto mw = stats::mann_whitney_two_sided(x, y);
        const double diff = stats::descriptives(x).median - stats::descriptives(y).median;
        panel.pairwise[i] = {first, second, mw.u, mw.p, mw.p, mw.exact,
                             diff > 0 ? 1 : (diff < 0 ? -1 : 0)};
        raw[i] = mw.p;
      }
      const auto adjusted = stats::holm(raw);
      for (std::size_t i = 0; i < 3; ++i) panel.pairwise[i].p_holm = adjusted[i];
      bundle.panels.push_back(panel);
    }
  }
  if (bundle.panels.empty()) throw AnalysisError("results contain no runs");
  return bundle;
}

ReportBundle analyze_results(const std::filesystem::path& results_file) {
  const auto records = read_results(results_file);
  return analyze(records);
}

json to_json(const ReportBundle& b) {
  json descriptives = json::array();
  for (const auto& d : b.descriptives) {
    descriptives.push_back({{"model", d.model},
                            {"agent", std::string(to_string(d.agent))},
                            {"condition", std::string(to_string(d.condition))},
                            {"n", d.stats.n},
                            {"mean", d.stats.mean},
                            {"median", d.stats.median},
                            {"q1", d.stats.q1},
                            {"q3", d.stats.q3},
                            {"iqr", d.stats.iqr}});
  }
  json panels = json::array();
  for (const auto& p : b.panels) {
    json pairs = json::array();
    for (const auto& pr : p.pairwise) {
      pairs.push_back({{"first", std::string(to_string(pr.first))},
                       {"second", std::string(to_string(pr.second))},
                       {"u", pr.u},
                       {"p_raw", pr.p_raw},
                       {"p_holm", pr.p_holm},
                       {"exact", pr.exact},
                       {"direction", pr.direction}});
    }
    panels.push_back({{"model", p.model},
                      {"agent", std::string(to_string(p.agent))},
                      {"omnibus", {{"h", p.omnibus.h}, {"df", p.omnibus.df}, {"p", p.omnibus.p}}},
                      {"pairwise", pairs}});
  }
  json tool_use = json::array();
  for (const auto& t : b.tool_use) {
    tool_use.push_back({{"model", t.model},
                        {"agent", std::string(to_string(t.agent))},
                        {"runs", t.runs},
                        {"rate", t.rate}});
  }
  json outcomes = json::array();
  for (const auto& o : b.outcomes) {
    outcomes.push_back({{"model", o.model},
                        {"agent", std::string(to_string(o.agent))},
                        {"condition", std::string(to_string(o.condition))},
                        {"successes", o.successes},
                        {"failures", o.failures}});
  }
  return {{"descriptives", descriptives},
          {"panels", panels},
          {"tool_use", tool_use},
          {"outcomes", outcomes},
          {"embed_models", b.embed_models}};
}

}  // namespace fairaudit::runner
