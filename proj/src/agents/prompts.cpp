#include "fairaudit/agents/prompts.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fairaudit/util/digest.hpp"
#include "fairaudit_default_prompts.hpp"

namespace fairaudit::agents {

namespace fs = std::filesystem;
using gateway::ChatMessage;

namespace {

std::string normalize(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r' || s.back() == ' ')) s.pop_back();
  return s;
}

std::string read_template(const fs::path& dir, const char* name) {
  const fs::path path = dir / (std::string(name) + ".txt");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("missing prompt template " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return normalize(buf.str());
}

}  // namespace

std::string PromptSet::digest(AgentRole role) const {
  std::string material;
  auto add = [&](const char* name, const std::string& text) {
    material += name;
    material += '\x1f';
    material += text;
    material += '\x1e';
  };
  if (role == AgentRole::DomainExpert) {
    add("domain_expert_system", domain_expert_system);
    add("domain_expert_tools", domain_expert_tools);
    add("domain_expert_task", domain_expert_task);
  } else {
    add("fairness_consultant_system", fairness_consultant_system);
    add("fairness_consultant_tools", fairness_consultant_tools);
    add("fairness_consultant_task", fairness_consultant_task);
  }
  add("repair", repair);
  return util::sha256_hex(material);
}

PromptSet default_prompts() {
  using namespace default_prompt_text;
  return {normalize(kDomainExpertSystem),       normalize(kDomainExpertTools),
          normalize(kDomainExpertTask),         normalize(kFairnessConsultantSystem),
          normalize(kFairnessConsultantTools),  normalize(kFairnessConsultantTask),
          normalize(kRepair)};
}

PromptSet load_prompts(const fs::path& dir) {
  return {read_template(dir, "domain_expert_system"),
          read_template(dir, "domain_expert_tools"),
          read_template(dir, "domain_expert_task"),
          read_template(dir, "fairness_consultant_system"),
          read_template(dir, "fairness_consultant_tools"),
          read_template(dir, "fairness_consultant_task"),
          read_template(dir, "repair")};
}

std::string render_template(const std::string& tmpl, const std::map<std::string, std::string>& vars) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t pos = 0;
  while (true) {
    const auto open = tmpl.find("{{", pos);
    if (open == std::string::npos) {
      out.append(tmpl, pos, std::string::npos);
      return out;
    }
    const auto close = tmpl.find("}}", open + 2);
    if (close == std::string::npos) {
      out.append(tmpl, pos, std::string::npos);
      return out;
    }
    out.append(tmpl, pos, open - pos);
    const std::string key = tmpl.substr(open + 2, close - open - 2);
    auto it = vars.find(key);
    if (it == vars.end()) throw std::invalid_argument("no value for placeholder {{" + key + "}}");
    out += it->second;
    pos = close + 2;
  }
}

std::vector<ChatMessage> domain_expert_messages(const PromptSet& prompts,
                                                const std::string& clinical_context,
                                                Condition condition) {
  const std::string task =
      render_template(prompts.domain_expert_task, {{"clinical_context", clinical_context}});
  if (condition == Condition::LlmOnly) return {ChatMessage::user(task)};
  std::string system = prompts.domain_expert_system;
  if (condition == Condition::AgentRag) system += "\n\n" + prompts.domain_expert_tools;
  return {ChatMessage::system(std::move(system)), ChatMessage::user(task)};
}

std::vector<ChatMessage> fairness_consultant_messages(const PromptSet& prompts,
                                                      const DomainExpertOutput& findings,
                                                      Condition condition) {
  std::string drivers;
  for (const auto& d : findings.disparity_drivers) {
    if (!drivers.empty()) drivers += '\n';
    drivers += "- " + d;
  }
  const std::string task = render_template(
      prompts.fairness_consultant_task, {{"disparity_drivers", drivers}, {"summary", findings.summary}});
  if (condition == Condition::LlmOnly) return {ChatMessage::user(task)};
  std::string system = prompts.fairness_consultant_system;
  if (condition == Condition::AgentRag) system += "\n\n" + prompts.fairness_consultant_tools;
  return {ChatMessage::system(std::move(system)), ChatMessage::user(task)};
}

}  // namespace fairaudit::agents
