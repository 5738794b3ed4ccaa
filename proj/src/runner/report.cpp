#include "fairaudit/runner/report.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <fstream>

namespace fairaudit::runner {

namespace fs = std::filesystem;

namespace {

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

template <typename... Fields>
std::string csv_row(const Fields&... fields) {
  std::string row;
  ((row += (row.empty() ? "" : ","), row += csv_field(fields)), ...);
  row.push_back('\n');
  return row;
}

std::string fixed(double v, int decimals) { return fmt::format("{:.{}f}", v, decimals); }

std::string pair_id(const PairwiseResult& p) {
  return std::string(to_string(p.first)) + " vs " + std::string(to_string(p.second));
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

constexpr const char* kMethodsFooter =
    "- Quantiles: linear interpolation at fractional index (n-1)p; IQR = Q3 - Q1.\n"
    "- Overall test: Kruskal-Wallis H with tie correction; p from chi-square with k-1 df.\n"
    "- Pairwise: two-sided Wilcoxon rank-sum (Mann-Whitney U). Exact permutation p when both "
    "samples have n <= 8 and no ties; otherwise normal approximation with continuity "
    "correction and tie-corrected variance.\n"
    "- Holm correction over the 3 comparisons of each model/agent panel.\n"
    "- p-values to 6 decimals; values below 0.001 shown as <.001.\n"
    "- Failed parses are excluded from similarity samples and counted under Run outcomes.\n";

}  // namespace

std::string format_p(double p) { return p < 0.001 ? "<.001" : fixed(p, 6); }

std::string significance_stars(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  return "ns";
}

std::string comparison_label(const PairwiseResult& pair) {
  const char* symbol = pair.direction > 0 ? ">" : (pair.direction < 0 ? "<" : "=");
  return fmt::format("{} {} {}", display_label(pair.first), symbol, display_label(pair.second));
}

RenderedReport render_tables(const ReportBundle& bundle) {
  RenderedReport report;
  std::string md = "# Fairness audit ablation report\n\n";

  md += "## Semantic similarity to ground truth\n\n";
  md += "| Model | Agent | Condition | n | M | Mdn | IQR |\n";
  md += "|---|---|---|---|---|---|---|\n";
  std::string last_model, last_agent;
  for (const auto& d : bundle.descriptives) {
    const std::string agent(display_label(d.agent));
    const bool new_model = d.model != last_model;
    const bool new_agent = new_model || agent != last_agent;
    md += fmt::format("| {} | {} | {} | {} | {} | {} | {} |\n", new_model ? d.model : "",
                      new_agent ? agent : "", display_label(d.condition), d.stats.n,
                      fixed(d.stats.mean, 3), fixed(d.stats.median, 3), fixed(d.stats.iqr, 3));
    last_model = d.model;
    last_agent = agent;
  }

  md += "\n## Statistical tests\n\n";
  md += "| Model | Agent | Overall test | Pairwise comparison (p Holm) |\n";
  md += "|---|---|---|---|\n";
  last_model.clear();
  for (const auto& p : bundle.panels) {
    for (std::size_t i = 0; i < p.pairwise.size(); ++i) {
      const auto& pr = p.pairwise[i];
      const std::string p_text = format_p(pr.p_holm);
      md += fmt::format(
          "| {} | {} | {} | {} ({}) |\n", (i == 0 && p.model != last_model) ? p.model : "",
          i == 0 ? std::string(display_label(p.agent)) : "",
          i == 0 ? fmt::format("H({})={:.2f}, p{}", p.omnibus.df, p.omnibus.h,
                               p.omnibus.p < 0.001 ? "<.001" : "=" + fixed(p.omnibus.p, 6))
                 : "",
          comparison_label(pr), p_text.starts_with("<") ? "p" + p_text : "p=" + p_text);
    }
    last_model = p.model;
  }

  md += "\n## Retrieval tool use, Agent (R)\n\n";
  md += "| Model | Agent | Runs | Tool use |\n|---|---|---|---|\n";
  for (const auto& t : bundle.tool_use) {
    md += fmt::format("| {} | {} | {} | {:.1f}% |\n", t.model, display_label(t.agent), t.runs,
                      100.0 * t.rate);
  }

  md += "\n## Run outcomes\n\n";
  md += "| Model | Agent | Condition | Succeeded | Failed |\n|---|---|---|---|---|\n";
  for (const auto& o : bundle.outcomes) {
    md += fmt::format("| {} | {} | {} | {} | {} |\n", o.model, display_label(o.agent),
                      display_label(o.condition), o.successes, o.failures);
  }

  md += "\n## Methods\n\n";
  std::string embed;
  for (const auto& m : bundle.embed_models) embed += (embed.empty() ? "" : ", ") + m;
  md += "- Similarity: cosine of whole-text embeddings (" + (embed.empty() ? "n/a" : embed) + ").\n";
  md += kMethodsFooter;
  report.markdown = std::move(md);

  std::string desc = csv_row("model", "agent", "condition", "n", "mean", "median", "q1", "q3", "iqr");
  for (const auto& d : bundle.descriptives) {
    desc += csv_row(d.model, std::string(to_string(d.agent)), std::string(to_string(d.condition)),
                    std::to_string(d.stats.n), fixed(d.stats.mean, 6), fixed(d.stats.median, 6),
                    fixed(d.stats.q1, 6), fixed(d.stats.q3, 6), fixed(d.stats.iqr, 6));
  }
  report.csv_files["descriptives.csv"] = std::move(desc);

  std::string omni = csv_row("model", "agent", "h", "df", "p");
  std::string pairs =
      csv_row("model", "agent", "first", "second", "u", "p_raw", "p_holm", "method", "direction");
  for (const auto& p : bundle.panels) {
    const std::string agent(to_string(p.agent));
    omni += csv_row(p.model, agent, fixed(p.omnibus.h, 6), std::to_string(p.omnibus.df),
                    fixed(p.omnibus.p, 6));
    for (const auto& pr : p.pairwise) {
      pairs += csv_row(p.model, agent, std::string(to_string(pr.first)),
                       std::string(to_string(pr.second)), fixed(pr.u, 1), fixed(pr.p_raw, 6),
                       fixed(pr.p_holm, 6), pr.exact ? "exact" : "normal",
                       std::to_string(pr.direction));
    }
  }
  report.csv_files["omnibus.csv"] = std::move(omni);
  report.csv_files["pairwise.csv"] = std::move(pairs);

  std::string tools = csv_row("model", "agent", "runs", "rate");
  for (const auto& t : bundle.tool_use) {
    tools += csv_row(t.model, std::string(to_string(t.agent)), std::to_string(t.runs),
                     fixed(t.rate, 6));
  }
  report.csv_files["tool_use.csv"] = std::move(tools);

  std::string outcomes = csv_row("model", "agent", "condition", "successes", "failures");
  for (const auto& o : bundle.outcomes) {
    outcomes += csv_row(o.model, std::string(to_string(o.agent)),
                        std::string(to_string(o.condition)), std::to_string(o.successes),
                        std::to_string(o.failures));
  }
  report.csv_files["outcomes.csv"] = std::move(outcomes);
  return report;
}

void write_report(const RenderedReport& report, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  write_file(out_dir / "report.md", report.markdown);
  for (const auto& [name, content] : report.csv_files) write_file(out_dir / name, content);
}

PlotData emit_plot_data(std::span<const RunRecord> records) {
  PlotData data;
  data.data_csv = csv_row("model", "agent", "condition", "repetition", "similarity");
  auto add = [&](const RunRecord& r, AgentRole role, const auto& agent) {
    if (!agent.similarity) return;
    data.data_csv += csv_row(r.model, std::string(to_string(role)),
                             std::string(to_string(r.condition)), std::to_string(r.repetition),
                             fixed(agent.similarity->value, 6));
  };
  for (const auto& r : records) {
    add(r, AgentRole::DomainExpert, r.agent1);
    if (r.agent2) add(r, AgentRole::FairnessConsultant, *r.agent2);
  }

  data.annotations_csv = csv_row("model", "agent", "pair", "p_holm", "stars");
  try {
    const auto bundle = analyze(records);
    for (const auto& p : bundle.panels) {
      for (const auto& pr : p.pairwise) {
        data.annotations_csv += csv_row(p.model, std::string(to_string(p.agent)), pair_id(pr),
                                        fixed(pr.p_holm, 6), significance_stars(pr.p_holm));
      }
    }
  } catch (const AnalysisError& e) {
    spdlog::warn("plot annotations skipped: {}", e.what());
  }
  return data;
}

void write_plot_data(const PlotData& data, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  write_file(out_dir / kPlotDataFile, data.data_csv);
  write_file(out_dir / kPlotAnnotationsFile, data.annotations_csv);
}

}  // namespace fairaudit::runner
