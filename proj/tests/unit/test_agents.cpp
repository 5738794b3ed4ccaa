#include <doctest.h>

#include <mutex>

#include "fairaudit/agents/agents.hpp"
#include "fairaudit/agents/structured.hpp"
#include "fairaudit/gateway/mock_transport.hpp"
#include "fairaudit/rag/chunker.hpp"
#include "fairaudit/rag/corpus.hpp"
#include "fairaudit/rag/fairness_library.hpp"
#include "test_support.hpp"

using namespace fairaudit;
using namespace fairaudit::agents;
using nlohmann::json;
using Kind = StructuredOutputError::Kind;

namespace {

const char* const kDriversJson =
    R"({"disparity_drivers": ["delayed symptom evaluation", "insurance gaps"], "summary": "Black patients wait longer for diagnosis."})";
const char* const kConsultantJson =
    R"({"recommendations": [{"metric": "Equal Opportunity", "rationale": "missed cancers are the main harm."}, {"metric": "False Negative Rate Parity", "rationale": "error rates should match"}], "sensitive_attributes": ["race", "ethnicity"]})";
const char* const kDuplicateJson =
    R"({"recommendations": [{"metric": "Equal Opportunity", "rationale": "a"}, {"metric": "equal opportunity", "rationale": "b"}], "sensitive_attributes": ["race"]})";

/// Forwards to a mock and keeps every chat request body.
class RecordingTransport final : public gateway::Transport {
 public:
  explicit RecordingTransport(gateway::MockFixtures fx) : inner_(std::move(fx)) {}
  json post(std::string_view endpoint, const json& body) override {
    if (endpoint.find("chat") != std::string_view::npos) {
      std::lock_guard lock(mu_);
      chats.push_back(body);
    }
    return inner_.post(endpoint, body);
  }
  std::vector<json> chats;

 private:
  gateway::MockTransport inner_;
  std::mutex mu_;
};

gateway::MockRule rule(std::string name, std::vector<std::string> roles, std::vector<std::string> tools,
                       std::string first_contains, std::vector<gateway::MockReply> replies) {
  gateway::MockRule r;
  r.name = std::move(name);
  r.roles = std::move(roles);
  r.tools = std::move(tools);
  r.first_message_contains = std::move(first_contains);
  r.replies = std::move(replies);
  return r;
}

gateway::MockReply text(std::string content) { return {std::move(content), {}}; }
gateway::MockReply call(std::string tool, std::string query) {
  return {"", {{std::move(tool), json{{"query", std::move(query)}}}}};
}

gateway::MockFixtures fixtures() {
  gateway::MockFixtures fx;
  fx.embed.dim = 128;
  auto& rules = fx.rules;
  // A model named "stubborn" never fixes its duplicate metrics.
  gateway::MockRule stubborn;
  stubborn.name = "stubborn";
  stubborn.model = "stubborn";
  stubborn.replies = {text(kDuplicateJson)};
  rules.push_back(stubborn);

  rules.push_back(rule("a1-llm", {"user"}, {}, "Clinical context:", {text(kDriversJson)}));
  rules.push_back(rule("a1-nr", {"system", "user"}, {}, "You are the Domain Expert Agent",
                       {text(std::string("Here you go:\n```json\n") + kDriversJson + "\n```\nThanks.")}));
  rules.push_back(rule("a1-rag-search", {"system", "user"}, {kSearchLiteratureTool}, "You are the Domain Expert Agent",
                       {call(kSearchLiteratureTool, "racial disparities in time to diagnosis")}));
  rules.push_back(rule("a1-rag-answer", {"system", "user", "assistant", "tool"}, {kSearchLiteratureTool},
                       "You are the Domain Expert Agent", {text(kDriversJson)}));
  rules.push_back(rule("a2-llm", {"user"}, {}, "Domain expert findings.", {text(kConsultantJson)}));
  rules.push_back(rule("a2-nr", {"system", "user"}, {}, "You are the Fairness Consultant Agent",
                       {text(kDuplicateJson)}));
  rules.push_back(rule("a2-nr-repair", {"system", "user", "assistant", "user"}, {},
                       "You are the Fairness Consultant Agent", {text(kConsultantJson)}));
  rules.push_back(rule("a2-rag-lookup", {"system", "user"}, {kLookupMetricsTool},
                       "You are the Fairness Consultant Agent", {call(kLookupMetricsTool, "missed positives")}));
  rules.push_back(rule("a2-rag-answer", {"system", "user", "assistant", "tool"}, {kLookupMetricsTool},
                       "You are the Fairness Consultant Agent", {text(kConsultantJson)}));
  return fx;
}

struct Harness {
  std::shared_ptr<RecordingTransport> transport = std::make_shared<RecordingTransport>(fixtures());
  gateway::Gateway gw{transport};
  PromptSet prompts = default_prompts();
  RagParams rag{3, 1, 600, 100};

  AgentContext ctx(std::string model = "m") { return {gw, ModelSpec{model, 0.2, 5}, prompts, rag, "embed"}; }

  rag::VectorIndex corpus_index() {
    std::vector<rag::Chunk> chunks;
    for (const auto& doc : rag::ingest_corpus(testing::data_dir() / "demo" / "corpus")) {
      auto c = rag::chunk_document(doc, 600, 100);
      chunks.insert(chunks.end(), c.begin(), c.end());
    }
    rag::GatewayEmbedder embedder(gw, "embed");
    return rag::build_index(chunks, embedder);
  }

  rag::VectorIndex library_index() {
    const auto chunks =
        rag::library_chunks(rag::load_fairness_library(testing::data_dir() / "fairness_metrics.json"));
    rag::GatewayEmbedder embedder(gw, "embed");
    return rag::build_index(chunks, embedder);
  }
};

bool offers_tools(const json& body) { return body.contains("tools") && !body["tools"].empty(); }

}  // namespace

TEST_CASE("structured output extraction") {
  CHECK(parse_domain_expert_output(kDriversJson).summary == "Black patients wait longer for diagnosis.");
  const auto fenced =
      parse_domain_expert_output(std::string("Sure! {not json} here:\n```json\n") + kDriversJson + "\n```");
  CHECK(fenced.disparity_drivers == std::vector<std::string>{"delayed symptom evaluation", "insurance gaps"});
  CHECK(parse_domain_expert_output(std::string("Result: ") + kDriversJson + " -- done").summary.size() > 0);
  CHECK(extract_json_object(R"(x {"a": "}{", "b": {"c": 1}} y)") == json{{"a", "}{"}, {"b", {{"c", 1}}}});

  auto failure = [](auto&& fn) -> std::pair<Kind, std::string> {
    try {
      fn();
    } catch (const StructuredOutputError& e) {
      return {e.kind(), e.field()};
    }
    return {Kind::NoObject, "<no error>"};
  };
  CHECK(failure([] { parse_domain_expert_output(""); }) == std::pair{Kind::NoObject, std::string()});
  CHECK(failure([] { parse_domain_expert_output("no braces at all"); }) ==
        std::pair{Kind::NoObject, std::string()});
  CHECK(failure([] { parse_domain_expert_output(R"({"summary": "s"})"); }) ==
        std::pair{Kind::SchemaViolation, std::string("disparity_drivers")});
  CHECK(failure([] { parse_domain_expert_output(R"({"disparity_drivers": ["a"], "summary": ""})"); }) ==
        std::pair{Kind::SchemaViolation, std::string("summary")});
  CHECK(failure([] { parse_fairness_consultant_output(R"({"sensitive_attributes": ["race"]})"); }) ==
        std::pair{Kind::SchemaViolation, std::string("recommendations")});
  CHECK(failure([] { parse_fairness_consultant_output(kDuplicateJson); }) ==
        std::pair{Kind::SchemaViolation, std::string("recommendations[1].metric")});
  CHECK(failure([] {
          parse_fairness_consultant_output(R"({"recommendations": [{"metric": "x"}], "sensitive_attributes": []})");
        }) == std::pair{Kind::SchemaViolation, std::string("recommendations[0].rationale")});
}

TEST_CASE("consultant text rendering") {
  FairnessConsultantOutput out;
  out.recommendations = {{"m", "r"}};
  out.sensitive_attributes = {"a"};
  CHECK(render_consultant_text(out) == "Use m: r. Sensitive attributes: a.");
  CHECK(render_consultant_text(parse_fairness_consultant_output(kConsultantJson)) ==
        "Use Equal Opportunity: missed cancers are the main harm. "
        "Use False Negative Rate Parity: error rates should match. Sensitive attributes: race, ethnicity.");
}

TEST_CASE("prompt templates") {
  CHECK(render_template("a {{x}} b {{y}}{{x}}", {{"x", "1"}, {"y", "2"}}) == "a 1 b 21");
  CHECK_THROWS_AS(render_template("{{missing}}", {}), std::invalid_argument);
  CHECK(load_prompts(testing::data_dir() / "prompts") == default_prompts());

  const auto p = default_prompts();
  CHECK(domain_expert_messages(p, "ctx", Condition::LlmOnly) == domain_expert_messages(p, "ctx", Condition::LlmOnly));
  const auto llm = domain_expert_messages(p, "ctx", Condition::LlmOnly);
  REQUIRE(llm.size() == 1);
  CHECK(llm[0].role == gateway::Role::User);
  const auto nr = domain_expert_messages(p, "ctx", Condition::AgentNoRag);
  const auto rag = domain_expert_messages(p, "ctx", Condition::AgentRag);
  REQUIRE(nr.size() == 2);
  CHECK(nr[0].content == p.domain_expert_system);
  CHECK(rag[0].content.find(p.domain_expert_tools) != std::string::npos);
  CHECK(nr[1] == llm[0]);

  DomainExpertOutput findings{{"driver one", "driver two"}, "A verbatim summary."};
  const auto a2 = fairness_consultant_messages(p, findings, Condition::AgentNoRag);
  CHECK(a2.back().content.find("- driver one\n- driver two") != std::string::npos);
  CHECK(a2.back().content.find("A verbatim summary.") != std::string::npos);
  CHECK(p.digest(AgentRole::DomainExpert) != p.digest(AgentRole::FairnessConsultant));
}

TEST_CASE("domain expert in the LLM-only condition makes one call without tools") {
  Harness h;
  const auto r = run_domain_expert(h.ctx(), "EOCRC", Condition::LlmOnly, nullptr);
  REQUIRE(r.output);
  CHECK(r.trace.succeeded);
  CHECK(r.trace.chat_calls == 1);
  CHECK(r.trace.parse_attempts == 1);
  CHECK_FALSE(r.trace.tools_offered);
  CHECK(r.trace.tool_invocations.empty());
  REQUIRE(h.transport->chats.size() == 1);
  CHECK_FALSE(offers_tools(h.transport->chats[0]));
  CHECK(h.transport->chats[0]["messages"][0]["content"].get<std::string>().find("EOCRC") != std::string::npos);
  CHECK(h.transport->chats[0]["options"]["seed"] == 5);
}

TEST_CASE("domain expert without retrieval gets a persona but no tools") {
  Harness h;
  const auto r = run_domain_expert(h.ctx(), "EOCRC", Condition::AgentNoRag, nullptr);
  REQUIRE(r.output);
  CHECK(r.output->summary == "Black patients wait longer for diagnosis.");
  CHECK_FALSE(r.trace.tools_offered);
  CHECK(r.trace.chat_calls == 1);
  for (const auto& body : h.transport->chats) CHECK_FALSE(offers_tools(body));
}

TEST_CASE("domain expert with retrieval searches the corpus index") {
  Harness h;
  const auto index = h.corpus_index();
  const auto before = h.transport->chats.size();
  const auto r = run_domain_expert(h.ctx(), "EOCRC", Condition::AgentRag, &index);
  REQUIRE(r.output);
  CHECK(r.trace.tools_offered);
  CHECK(r.trace.chat_calls == 2);
  REQUIRE(r.trace.tool_invocations.size() == 1);
  const auto& inv = r.trace.tool_invocations[0];
  CHECK(inv.tool_name == kSearchLiteratureTool);
  CHECK(inv.query_text == "racial disparities in time to diagnosis");
  CHECK(inv.retrieved.size() == 3);
  std::set<std::string> sources;
  for (const auto& hit : inv.retrieved) {
    CHECK_NOTHROW(index.chunk(hit.chunk_id));
    sources.insert(hit.source_id);
  }
  CHECK(sources.size() == 3);
  const auto expected = index.search_diverse(h.gw.embed_one("embed", inv.query_text), 3, 1);
  CHECK(inv.retrieved == expected);

  REQUIRE(h.transport->chats.size() == before + 2);
  const json& second = h.transport->chats[before + 1];
  CHECK(offers_tools(second));
  CHECK(second["tools"][0]["function"]["name"] == kSearchLiteratureTool);
  const json& tool_msg = second["messages"][3];
  CHECK(tool_msg["role"] == "tool");
  CHECK(tool_msg["content"] == format_passages(index, expected));
}

TEST_CASE("retrieval conditions require an index") {
  Harness h;
  CHECK_THROWS_AS(run_domain_expert(h.ctx(), "EOCRC", Condition::AgentRag, nullptr), std::invalid_argument);
  CHECK_THROWS_AS(run_fairness_consultant(h.ctx(), {{"d"}, "s"}, Condition::AgentRag, nullptr),
                  std::invalid_argument);
}

TEST_CASE("consultant in the LLM-only condition parses equal opportunity and FNR parity") {
  Harness h;
  const DomainExpertOutput findings{{"delayed symptom evaluation"}, "Summary of findings."};
  const auto r = run_fairness_consultant(h.ctx(), findings, Condition::LlmOnly, nullptr);
  REQUIRE(r.output);
  REQUIRE(r.output->recommendations.size() == 2);
  CHECK(r.output->recommendations[0].metric == "Equal Opportunity");
  CHECK(r.output->recommendations[1].metric == "False Negative Rate Parity");
  CHECK(r.output->sensitive_attributes == std::vector<std::string>{"race", "ethnicity"});
  CHECK(r.trace.role == AgentRole::FairnessConsultant);
  const std::string prompt = h.transport->chats.at(0)["messages"][0]["content"];
  CHECK(prompt.find("Summary of findings.") != std::string::npos);
  CHECK(prompt.find("- delayed symptom evaluation") != std::string::npos);
}

TEST_CASE("consultant repairs duplicate metrics once") {
  Harness h;
  const auto r = run_fairness_consultant(h.ctx(), {{"d"}, "s"}, Condition::AgentNoRag, nullptr);
  REQUIRE(r.output);
  CHECK(r.trace.succeeded);
  CHECK(r.trace.parse_attempts == 2);
  CHECK(r.trace.chat_calls == 2);
  CHECK(r.trace.raw_text == kConsultantJson);
  REQUIRE(h.transport->chats.size() == 2);
  const json& repair = h.transport->chats[1]["messages"];
  CHECK(repair[2]["content"] == kDuplicateJson);
  const std::string ask = repair[3]["content"];
  CHECK(ask.find("duplicate metric") != std::string::npos);
  CHECK_FALSE(offers_tools(h.transport->chats[1]));
}

TEST_CASE("consultant that stays invalid fails without an output") {
  Harness h;
  const auto r = run_fairness_consultant(h.ctx("stubborn"), {{"d"}, "s"}, Condition::AgentNoRag, nullptr);
  CHECK_FALSE(r.output);
  CHECK_FALSE(r.trace.succeeded);
  CHECK(r.trace.parse_attempts == 2);
  CHECK(r.trace.error.find("duplicate metric") != std::string::npos);

  const auto llm = run_fairness_consultant(h.ctx("stubborn"), {{"d"}, "s"}, Condition::LlmOnly, nullptr);
  CHECK_FALSE(llm.output);
  CHECK(llm.trace.parse_attempts == 1);
}

TEST_CASE("consultant with retrieval looks up the metric library") {
  Harness h;
  const auto index = h.library_index();
  const auto r = run_fairness_consultant(h.ctx(), {{"d"}, "s"}, Condition::AgentRag, &index);
  REQUIRE(r.output);
  REQUIRE(r.trace.tool_invocations.size() == 1);
  const auto& inv = r.trace.tool_invocations[0];
  CHECK(inv.tool_name == kLookupMetricsTool);
  CHECK(inv.retrieved == index.search(h.gw.embed_one("embed", "missed positives"), 3));
}

TEST_CASE("trace JSON round trip") {
  Harness h;
  const auto index = h.corpus_index();
  const auto r = run_domain_expert(h.ctx(), "EOCRC", Condition::AgentRag, &index);
  CHECK(trace_from_json(to_json(r.trace)) == r.trace);
  CHECK(trace_from_json(json::parse(to_json(r.trace).dump())) == r.trace);
}
