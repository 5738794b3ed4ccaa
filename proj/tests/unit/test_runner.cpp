#include <doctest.h>

#include <atomic>
#include <map>
#include <sstream>

#include "demo.hpp"
#include "fairaudit/runner/analysis.hpp"
#include "fairaudit/runner/records.hpp"
#include "fairaudit/runner/report.hpp"
#include "fairaudit/runner/runner.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace fairaudit;
using namespace fairaudit::runner;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

RunnerOptions mock_options(int parallelism = 1) {
  RunnerOptions o;
  o.parallelism = parallelism;
  o.clock = fixed_clock();
  return o;
}

std::string run_demo(const fs::path& out, int reps, int parallelism = 1) {
  auto gw = testing::demo_gateway();
  const auto plan = testing::demo_plan(out, reps);
  return testing::read_text(execute_plan(plan, *gw, mock_options(parallelism)));
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

/// Counts embedding requests and can fail chat calls for one model.
class InstrumentedTransport final : public gateway::Transport {
 public:
  explicit InstrumentedTransport(std::string failing_model = "")
      : inner_(testing::demo_fixtures()), failing_model_(std::move(failing_model)) {}
  json post(std::string_view endpoint, const json& body) override {
    if (endpoint.find("embed") != std::string_view::npos) ++embed_posts;
    if (!failing_model_.empty() && endpoint.find("chat") != std::string_view::npos &&
        body.value("model", "") == failing_model_) {
      throw gateway::GatewayError(gateway::ErrorKind::HttpStatus, "HTTP 500 from server");
    }
    return inner_.post(endpoint, body);
  }
  std::atomic<int> embed_posts{0};

 private:
  gateway::MockTransport inner_;
  std::string failing_model_;
};

}  // namespace

TEST_CASE("run records round-trip through JSON lines") {
  testing::TempDir tmp;
  auto gw = testing::demo_gateway();
  const auto plan = testing::demo_plan(tmp.path(), 2);
  const auto kb = prepare_knowledge(plan, *gw);
  for (Condition c : kAllConditions) {
    const auto rec = run_cell(plan, *gw, agents::default_prompts(), kb, plan.models[0], c, 1, fixed_clock());
    CHECK(rec.run_id == make_run_id(plan.models[0].name, c, 1));
    CHECK(rec.seed == derive_run_seed(plan.master_seed, plan.models[0].name, c, 1));
    CHECK(rec.started_at == "1970-01-01T00:00:00Z");
    const std::string line = to_json_line(rec);
    CHECK(line.find('\n') == std::string::npos);
    CHECK(record_from_json(json::parse(line)) == rec);
    if (rec.agent1.succeeded()) CHECK(rec.agent1.similarity);
  }
}

TEST_CASE("results reader reports the offending line") {
  testing::TempDir tmp;
  auto gw = testing::demo_gateway();
  const auto plan = testing::demo_plan(tmp / "run", 1);
  const auto text = testing::read_text(execute_plan(plan, *gw, mock_options()));
  const auto first = lines_of(text).at(0);

  testing::write_text(tmp / "bad.jsonl", first + "\n\n{\"run_id\": \n");
  try {
    read_results(tmp / "bad.jsonl");
    FAIL("expected ResultsError");
  } catch (const ResultsError& e) {
    CHECK(std::string(e.what()).find("bad.jsonl:3") != std::string::npos);
  }
  auto wrong = json::parse(first);
  wrong["condition"] = "rag_only";
  testing::write_text(tmp / "cond.jsonl", wrong.dump() + "\n");
  CHECK_THROWS_AS(read_results(tmp / "cond.jsonl"), ResultsError);
  CHECK_THROWS_AS(read_results(tmp / "missing.jsonl"), ResultsError);
  testing::write_text(tmp / "blank.jsonl", "\n" + first + "\n\n");
  CHECK(read_results(tmp / "blank.jsonl").size() == 1);
}

TEST_CASE("mock runs are byte-identical and independent of parallelism") {
  testing::TempDir tmp;
  const auto a = run_demo(tmp / "a", 3);
  const auto b = run_demo(tmp / "b", 3);
  const auto c = run_demo(tmp / "c", 3, 4);
  CHECK(lines_of(a).size() == 18);
  CHECK(a == b);
  CHECK(a == c);
  auto resolved = [&](const char* run) {
    auto j = json::parse(testing::read_text(tmp / run / "plan.resolved.json"));
    CHECK(j.at("output_dir") == (tmp / run).string());
    j.erase("output_dir");
    return j;
  };
  CHECK(resolved("a") == resolved("b"));
}

TEST_CASE("resume completes a truncated results file") {
  testing::TempDir tmp;
  const auto full = run_demo(tmp / "full", 3);
  const auto lines = lines_of(full);
  std::string head;
  for (int i = 0; i < 7; ++i) head += lines[i] + "\n";

  SUBCASE("after a clean cut") {
    testing::write_text(tmp / "cut" / kResultsFileName, head);
    CHECK(run_demo(tmp / "cut", 3) == full);
  }
  SUBCASE("after a partial trailing record") {
    testing::write_text(tmp / "partial" / kResultsFileName, head + lines[7].substr(0, lines[7].size() / 2));
    CHECK(run_demo(tmp / "partial", 3) == full);
  }
  SUBCASE("with nothing left to do") {
    const auto again = run_demo(tmp / "full", 3);
    CHECK(again == full);
  }
}

TEST_CASE("aborted run keeps finished records and resumes") {
  testing::TempDir tmp;
  const auto plan = testing::demo_plan(tmp / "run", 2);
  auto failing = std::make_shared<InstrumentedTransport>("demo-large");
  gateway::Gateway gw(failing);
  std::size_t written = 0;
  try {
    execute_plan(plan, gw, mock_options());
    FAIL("expected RunAborted");
  } catch (const RunAborted& e) {
    written = e.records_written();
    CHECK(std::string(e.what()).find("HTTP 500") != std::string::npos);
  }
  CHECK(written == 6);
  const auto partial = read_results(plan.output_dir / kResultsFileName);
  CHECK(partial.size() == written);
  for (const auto& r : partial) CHECK(r.model == "demo-small");

  auto gw2 = testing::demo_gateway();
  execute_plan(plan, *gw2, mock_options());
  CHECK(testing::read_text(plan.output_dir / kResultsFileName) == run_demo(tmp / "reference", 2));
}

TEST_CASE("knowledge indexes are reused until the corpus changes") {
  testing::TempDir tmp;
  fs::copy(testing::data_dir() / "demo" / "corpus", tmp / "corpus");
  auto doc = json::parse(testing::read_text(testing::data_dir() / "demo" / "plan.json"));
  doc["corpus_dir"] = (tmp / "corpus").string();
  doc["fairness_library_path"] = (testing::data_dir() / "fairness_metrics.json").string();
  doc["output_dir"] = (tmp / "out").string();
  const auto plan = parse_plan(doc, testing::data_dir() / "demo");

  auto transport = std::make_shared<InstrumentedTransport>();
  const auto first = [&] {
    gateway::Gateway gw(transport);
    return prepare_knowledge(plan, gw);
  }();
  CHECK(fs::exists(tmp / "out" / "indexes" / "corpus.index.json"));
  CHECK(fs::exists(tmp / "out" / "indexes" / "library.index.json"));
  const int built = transport->embed_posts;
  CHECK(built > 0);

  const auto reused = [&] {
    gateway::Gateway gw(transport);
    return prepare_knowledge(plan, gw);
  }();
  CHECK(transport->embed_posts == built);
  CHECK(reused.corpus->entries() == first.corpus->entries());

  testing::write_text(tmp / "corpus" / "extra.md", "---\ntitle: Extra\n---\nA new article on survival gaps.\n");
  const auto rebuilt = [&] {
    gateway::Gateway gw(transport);
    return prepare_knowledge(plan, gw);
  }();
  CHECK(transport->embed_posts > built);
  CHECK(rebuilt.corpus->size() > first.corpus->size());
  CHECK(rebuilt.corpus->fingerprint() != first.corpus->fingerprint());
  CHECK(rag::load_index(tmp / "out" / "indexes" / "corpus.index.json").fingerprint() == rebuilt.corpus->fingerprint());
}

TEST_CASE("analysis matches reference statistics") {
  testing::TempDir tmp;
  auto gw = testing::demo_gateway();
  const auto plan = testing::demo_plan(tmp.path(), 10);
  const auto records = read_results(execute_plan(plan, *gw, mock_options()));
  REQUIRE(records.size() == 60);
  const auto bundle = analyze(records);

  std::map<std::tuple<std::string, AgentRole, Condition>, std::vector<double>> samples;
  std::map<std::tuple<std::string, AgentRole, Condition>, std::size_t> failures;
  for (const auto& r : records) {
    auto key1 = std::tuple{r.model, AgentRole::DomainExpert, r.condition};
    auto key2 = std::tuple{r.model, AgentRole::FairnessConsultant, r.condition};
    if (r.agent1.similarity) samples[key1].push_back(r.agent1.similarity->value);
    else ++failures[key1];
    if (r.agent2 && r.agent2->similarity) samples[key2].push_back(r.agent2->similarity->value);
    else ++failures[key2];
  }

  CHECK(bundle.panels.size() == 4);
  CHECK(bundle.descriptives.size() == 12);
  for (const auto& d : bundle.descriptives) {
    const auto& s = samples.at({d.model, d.agent, d.condition});
    CHECK(d.stats.n == s.size());
    auto sorted = s;
    std::sort(sorted.begin(), sorted.end());
    CHECK(d.stats.median == doctest::Approx(testing::oracle::quantile(sorted, 0.5)).epsilon(1e-12));
  }
  for (const auto& o : bundle.outcomes) {
    CHECK(o.successes == samples[{o.model, o.agent, o.condition}].size());
    CHECK(o.failures == failures[{o.model, o.agent, o.condition}]);
  }
  for (const auto& panel : bundle.panels) {
    auto group = [&](Condition c) { return samples.at({panel.model, panel.agent, c}); };
    const std::vector<std::vector<double>> groups = {group(Condition::LlmOnly), group(Condition::AgentNoRag),
                                                     group(Condition::AgentRag)};
    CHECK(panel.omnibus.df == 2);
    CHECK(panel.omnibus.h == doctest::Approx(testing::oracle::kruskal_wallis_h(groups)).epsilon(1e-9));
    CHECK(panel.omnibus.p == doctest::Approx(testing::oracle::chi_square_sf(panel.omnibus.h, 2)).epsilon(1e-9));
    std::vector<double> raw;
    for (std::size_t i = 0; i < 3; ++i) {
      const auto& pair = panel.pairwise[i];
      CHECK(pair.first == kPairwiseComparisons[i].first);
      CHECK(pair.second == kPairwiseComparisons[i].second);
      CHECK(pair.u == testing::oracle::mann_whitney_u(group(pair.first), group(pair.second)));
      raw.push_back(pair.p_raw);
    }
    const auto adjusted = testing::oracle::holm(raw);
    for (std::size_t i = 0; i < 3; ++i) CHECK(panel.pairwise[i].p_holm == doctest::Approx(adjusted[i]).epsilon(1e-12));
  }
  REQUIRE(bundle.tool_use.size() == 4);
  for (const auto& t : bundle.tool_use) {
    CHECK(t.runs == 10);
    CHECK(t.rate == 1.0);
  }
}

TEST_CASE("analysis rejects unusable inputs") {
  testing::TempDir tmp;
  auto gw = testing::demo_gateway();
  auto records = read_results(execute_plan(testing::demo_plan(tmp.path(), 3), *gw, mock_options()));
  CHECK_THROWS_AS(analyze(std::span<const RunRecord>()), AnalysisError);

  auto dup = records;
  dup.push_back(records.front());
  CHECK_THROWS_WITH_AS(analyze(dup), doctest::Contains("duplicate run_id"), AnalysisError);

  std::vector<RunRecord> no_rag;
  for (const auto& r : records) {
    if (r.condition != Condition::AgentRag) no_rag.push_back(r);
  }
  CHECK_THROWS_WITH_AS(analyze(no_rag), doctest::Contains("agent_rag"), AnalysisError);
}

TEST_CASE("report tables, CSV exports and plot data") {
  testing::TempDir tmp;
  auto gw = testing::demo_gateway();
  const auto records = read_results(execute_plan(testing::demo_plan(tmp / "run", 10), *gw, mock_options()));
  const auto bundle = analyze(records);
  const auto rendered = render_tables(bundle);
  for (const char* name : {"descriptives.csv", "omnibus.csv", "pairwise.csv", "tool_use.csv", "outcomes.csv"}) {
    CHECK_MESSAGE(rendered.csv_files.contains(name), name);
  }
  CHECK(lines_of(rendered.csv_files.at("pairwise.csv")).size() == 1 + 4 * 3);
  CHECK(lines_of(rendered.csv_files.at("descriptives.csv")).size() == 1 + 12);
  CHECK(rendered.markdown.find("H(2)=") != std::string::npos);
  CHECK(rendered.markdown.find("Agent (NR)") != std::string::npos);

  write_report(rendered, tmp / "report");
  CHECK(testing::read_text(tmp / "report" / "report.md") == rendered.markdown);
  CHECK(testing::read_text(tmp / "report" / "pairwise.csv") == rendered.csv_files.at("pairwise.csv"));

  const auto plot = emit_plot_data(records);
  std::size_t scored = 0;
  for (const auto& r : records) scored += (r.agent1.similarity ? 1 : 0) + (r.agent2 && r.agent2->similarity ? 1 : 0);
  const auto rows = lines_of(plot.data_csv);
  CHECK(rows.at(0) == "model,agent,condition,repetition,similarity");
  CHECK(rows.size() == 1 + scored);
  const auto notes = lines_of(plot.annotations_csv);
  CHECK(notes.at(0) == "model,agent,pair,p_holm,stars");
  CHECK(notes.size() == 1 + 12);

  write_plot_data(plot, tmp / "plot");
  CHECK(testing::read_text(tmp / "plot" / kPlotDataFile) == plot.data_csv);
  CHECK(testing::read_text(tmp / "plot" / kPlotAnnotationsFile) == plot.annotations_csv);
}

TEST_CASE("plot data from records that cannot be analyzed") {
  testing::TempDir tmp;
  auto gw = testing::demo_gateway();
  auto plan = testing::demo_plan(tmp.path(), 6);
  plan.conditions = {Condition::LlmOnly};
  const auto records = read_results(execute_plan(plan, *gw, mock_options()));
  const auto plot = emit_plot_data(records);
  CHECK(lines_of(plot.annotations_csv).size() == 1);
  CHECK(lines_of(plot.data_csv).size() > 1);
}

TEST_CASE("report formatting helpers") {
  CHECK(format_p(0.0004) == "<.001");
  CHECK(format_p(0.0273237) == "0.027324");
  CHECK(significance_stars(0.0009) == "***");
  CHECK(significance_stars(0.009) == "**");
  CHECK(significance_stars(0.049) == "*");
  CHECK(significance_stars(0.05) == "ns");
  PairwiseResult pair;
  pair.first = Condition::AgentNoRag;
  pair.second = Condition::LlmOnly;
  pair.direction = -1;
  CHECK(comparison_label(pair) == "Agent (NR) < LLM");
  pair.direction = 1;
  CHECK(comparison_label(pair) == "Agent (NR) > LLM");
}
