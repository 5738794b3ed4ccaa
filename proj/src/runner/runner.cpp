#include "fairaudit/runner/runner.hpp"

#include <spdlog/spdlog.h>

#include <atomic>
#include <chrono>
#include <ctime>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>
#include <tuple>

#include "fairaudit/agents/agents.hpp"
#include "fairaudit/agents/structured.hpp"
#include "fairaudit/eval/similarity.hpp"
#include "fairaudit/rag/chunker.hpp"
#include "fairaudit/rag/corpus.hpp"
#include "fairaudit/rag/fairness_library.hpp"

namespace fairaudit::runner {

namespace fs = std::filesystem;

Clock system_clock() {
  return [] {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return std::string(buf);
  };
}

Clock fixed_clock() {
  return [] { return std::string("1970-01-01T00:00:00Z"); };
}

namespace {

rag::VectorIndex load_or_build(const std::vector<rag::Chunk>& chunks, rag::Embedder& embedder,
                               const fs::path& path) {
  if (fs::exists(path)) {
    try {
      auto index = rag::load_index(path);
      if (index.embed_model() == embedder.model_name() &&
          index.fingerprint() == rag::chunks_fingerprint(chunks)) {
        return index;
      }
      spdlog::info("index {} is stale; rebuilding", path.string());
    } catch (const rag::RagError& e) {
      spdlog::warn("cannot reuse index {}: {}", path.string(), e.what());
    }
  }
  auto index = rag::build_index(chunks, embedder);
  rag::save_index(index, path);
  return index;
}

/// Drops a trailing partial line left by an interrupted append.
void truncate_partial_line(const fs::path& path) {
  if (!fs::exists(path)) return;
  const auto size = fs::file_size(path);
  if (size == 0) return;
  std::ifstream in(path, std::ios::binary);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();
  if (content.back() == '\n') return;
  const auto last_nl = content.find_last_of('\n');
  const std::uintmax_t keep = last_nl == std::string::npos ? 0 : last_nl + 1;
  spdlog::warn("dropping partial trailing record in {}", path.string());
  fs::resize_file(path, keep);
}

using CellKey = std::tuple<std::string, Condition, int>;

struct Cell {
  const ModelSpec* model;
  Condition condition;
  int repetition;
};

}  // namespace

KnowledgeBase prepare_knowledge(const ExperimentPlan& plan, gateway::Gateway& gateway) {
  KnowledgeBase kb;
  rag::GatewayEmbedder embedder(gateway, plan.rag_embed_model);
  const fs::path dir = plan.output_dir / "indexes";

  std::vector<rag::Chunk> corpus_chunks;
  for (const auto& doc : rag::ingest_corpus(plan.corpus_dir)) {
    auto chunks = rag::chunk_document(doc, static_cast<std::size_t>(plan.rag.chunk_size),
                                      static_cast<std::size_t>(plan.rag.chunk_overlap));
    corpus_chunks.insert(corpus_chunks.end(), chunks.begin(), chunks.end());
  }
  kb.corpus = load_or_build(corpus_chunks, embedder, dir / "corpus.index.json");

  const auto library = rag::load_fairness_library(plan.fairness_library_path);
  kb.library = load_or_build(rag::library_chunks(library), embedder, dir / "library.index.json");
  return kb;
}

RunRecord run_cell(const ExperimentPlan& plan, gateway::Gateway& gateway,
                   const agents::PromptSet& prompts, const KnowledgeBase& knowledge,
                   const ModelSpec& model, Condition condition, int repetition,
                   const Clock& clock) {
  RunRecord r;
  r.run_id = make_run_id(model.name, condition, repetition);
  r.model = model.name;
  r.condition = condition;
  r.repetition = repetition;
  r.seed = model.seed ? *model.seed
                      : derive_run_seed(plan.master_seed, model.name, condition, repetition);
  r.prompt_hashes = {prompts.digest(AgentRole::DomainExpert),
                     prompts.digest(AgentRole::FairnessConsultant)};
  r.started_at = clock();

  ModelSpec seeded = model;
  seeded.seed = r.seed;
  const agents::AgentContext ctx{gateway, seeded, prompts, plan.rag, plan.rag_embed_model};
  const rag::VectorIndex* corpus = knowledge.corpus ? &*knowledge.corpus : nullptr;
  const rag::VectorIndex* library = knowledge.library ? &*knowledge.library : nullptr;

  auto a1 = agents::run_domain_expert(ctx, plan.clinical_context, condition, corpus);
  r.agent1.trace = std::move(a1.trace);
  if (a1.output) {
    r.agent1.evaluated_text = a1.output->summary;
    r.agent1.similarity = eval::score_output(r.agent1.evaluated_text, plan.ground_truth.agent1_text,
                                             plan.eval_embed_model, gateway);
    r.agent1.output = std::move(a1.output);

    auto a2 = agents::run_fairness_consultant(ctx, *r.agent1.output, condition, library);
    AgentRecord<agents::FairnessConsultantOutput> rec;
    rec.trace = std::move(a2.trace);
    if (a2.output) {
      rec.evaluated_text = agents::render_consultant_text(*a2.output);
      rec.similarity = eval::score_output(rec.evaluated_text, plan.ground_truth.agent2_text,
                                          plan.eval_embed_model, gateway);
      rec.output = std::move(a2.output);
    }
    r.agent2 = std::move(rec);
  }
  r.finished_at = clock();
  return r;
}

fs::path execute_plan(const ExperimentPlan& plan, gateway::Gateway& gateway,
                      const RunnerOptions& options) {
  check_paths_exist(plan);
  fs::create_directories(plan.output_dir);
  {
    std::ofstream snapshot(plan.output_dir / "plan.resolved.json", std::ios::trunc);
    snapshot << to_json(plan).dump(2) << '\n';
  }

  const fs::path results = plan.output_dir / kResultsFileName;
  truncate_partial_line(results);
  std::set<CellKey> done;
  if (fs::exists(results)) {
    for (const auto& r : read_results(results)) done.emplace(r.model, r.condition, r.repetition);
  }

  const agents::PromptSet prompts =
      plan.prompts_dir.empty() ? agents::default_prompts() : agents::load_prompts(plan.prompts_dir);

  std::vector<Cell> pending;
  for (const auto& m : plan.models) {
    for (Condition c : plan.conditions) {
      for (int rep = 0; rep < plan.repetitions; ++rep) {
        if (!done.contains(CellKey(m.name, c, rep))) pending.push_back({&m, c, rep});
      }
    }
  }
  if (!done.empty()) {
    spdlog::info("resuming: {} cell(s) already recorded, {} to run", done.size(), pending.size());
  }
  if (pending.empty()) return results;

  KnowledgeBase knowledge;
  const bool needs_rag = std::find(plan.conditions.begin(), plan.conditions.end(),
                                   Condition::AgentRag) != plan.conditions.end();
  if (needs_rag) knowledge = prepare_knowledge(plan, gateway);

  std::ofstream out(results, std::ios::binary | std::ios::app);
  if (!out) throw RunAborted("cannot open results file " + results.string(), 0);

  // Workers fill slots; the writer appends the finished prefix in plan order.
  std::vector<std::optional<RunRecord>> slots(pending.size());
  std::vector<bool> written(pending.size(), false);
  std::size_t next_to_write = 0;
  std::size_t records_written = 0;
  std::mutex write_mutex;
  std::atomic<std::size_t> next_cell{0};
  std::atomic<bool> stop{false};
  std::string first_error;

  auto write_record = [&](std::size_t i) {
    out << to_json_line(*slots[i]) << '\n';
    out.flush();
    written[i] = true;
    ++records_written;
  };

  auto worker = [&] {
    while (!stop) {
      const std::size_t i = next_cell.fetch_add(1);
      if (i >= pending.size()) return;
      const Cell& cell = pending[i];
      try {
        RunRecord rec = run_cell(plan, gateway, prompts, knowledge, *cell.model, cell.condition,
                                 cell.repetition, options.clock);
        std::lock_guard lock(write_mutex);
        slots[i] = std::move(rec);
        while (next_to_write < slots.size() && slots[next_to_write]) write_record(next_to_write++);
      } catch (const std::exception& e) {
        std::lock_guard lock(write_mutex);
        if (!stop.exchange(true)) {
          first_error = make_run_id(cell.model->name, cell.condition, cell.repetition) + ": " + e.what();
        }
        return;
      }
    }
  };

  const int threads = std::max(1, std::min<int>(options.parallelism, static_cast<int>(pending.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  if (stop) {
    // Keep whatever finished after the failed cell; resume skips it.
    for (std::size_t i = 0; i < slots.size(); ++i) {
      if (slots[i] && !written[i]) write_record(i);
    }
    throw RunAborted(first_error, records_written);
  }
  return results;
}

}  // namespace fairaudit::runner
