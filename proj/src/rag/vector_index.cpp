#include "fairaudit/rag/vector_index.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "fairaudit/util/digest.hpp"

namespace fairaudit::rag {

using nlohmann::json;

namespace {

constexpr const char* kIndexFormat = "fairaudit.vector-index";
constexpr int kIndexVersion = 1;

}  // namespace

bool ranks_before(const RetrievalResult& a, const RetrievalResult& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.chunk_id < b.chunk_id;
}

std::string chunks_fingerprint(std::span<const Chunk> chunks) {
  std::string material;
  for (const auto& c : chunks) {
    material += c.chunk_id;
    material += '\x1f';
    material += c.source_id;
    material += '\x1f';
    material += std::to_string(c.start) + ':' + std::to_string(c.end);
    material += '\x1f';
    material += c.text;
    material += '\x1e';
  }
  return util::sha256_hex(material);
}

VectorIndex::VectorIndex(std::string embed_model, std::vector<IndexEntry> entries)
    : embed_model_(std::move(embed_model)), entries_(std::move(entries)) {
  if (entries_.empty()) throw RagError("vector index needs at least one entry");
  dim_ = entries_.front().embedding.dim();
  if (dim_ == 0) throw RagError("embedding dimension must be positive");
  norms_.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (e.embedding.dim() != dim_) {
      throw RagError("embedding dimension mismatch at " + e.chunk.chunk_id + ": " +
                     std::to_string(e.embedding.dim()) + " vs " + std::to_string(dim_));
    }
    double sq = 0.0;
    for (double x : e.embedding.values) sq += x * x;
    if (sq == 0.0) throw RagError("zero embedding for " + e.chunk.chunk_id);
    norms_.push_back(std::sqrt(sq));
    if (!by_id_.emplace(e.chunk.chunk_id, i).second) {
      throw RagError("duplicate chunk id " + e.chunk.chunk_id);
    }
  }
}

const Chunk& VectorIndex::chunk(const std::string& chunk_id) const {
  auto it = by_id_.find(chunk_id);
  if (it == by_id_.end()) throw RagError("unknown chunk id " + chunk_id);
  return entries_[it->second].chunk;
}

std::string VectorIndex::fingerprint() const {
  std::vector<Chunk> chunks;
  chunks.reserve(entries_.size());
  for (const auto& e : entries_) chunks.push_back(e.chunk);
  return chunks_fingerprint(chunks);
}

std::vector<double> VectorIndex::scores(const EmbeddingVector& query) const {
  if (query.dim() != dim_) {
    throw RagError("query dimension " + std::to_string(query.dim()) + " does not match index " +
                   std::to_string(dim_));
  }
  double sq = 0.0;
  for (double x : query.values) sq += x * x;
  if (sq == 0.0) throw RagError("zero query embedding");
  const double qnorm = std::sqrt(sq);

  std::vector<double> out(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& v = entries_[i].embedding.values;
    double dot = 0.0;
    for (std::size_t d = 0; d < dim_; ++d) dot += v[d] * query.values[d];
    out[i] = std::clamp(dot / (norms_[i] * qnorm), -1.0, 1.0);
  }
  return out;
}

std::vector<RetrievalResult> VectorIndex::rank_all(const EmbeddingVector& query) const {
  return search(query, entries_.size());
}

std::vector<RetrievalResult> VectorIndex::search(const EmbeddingVector& query,
                                                 std::size_t k) const {
  const auto s = scores(query);
  std::vector<RetrievalResult> all;
  all.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    all.push_back({entries_[i].chunk.chunk_id, entries_[i].chunk.source_id, s[i]});
  }
  const std::size_t n = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n), all.end(),
                    ranks_before);
  all.resize(n);
  return all;
}

std::vector<RetrievalResult> VectorIndex::search_diverse(const EmbeddingVector& query,
                                                         std::size_t k,
                                                         std::size_t per_source_cap) const {
  const auto ranked = rank_all(query);
  std::vector<RetrievalResult> picked;
  std::vector<const RetrievalResult*> skipped;
  std::map<std::string, std::size_t, std::less<>> per_source;
  for (const auto& r : ranked) {
    if (picked.size() >= k) break;
    auto& count = per_source[r.source_id];
    if (count >= per_source_cap) {
      skipped.push_back(&r);
      continue;
    }
    ++count;
    picked.push_back(r);
  }
  for (const auto* r : skipped) {
    if (picked.size() >= k) break;
    picked.push_back(*r);
  }
  std::sort(picked.begin(), picked.end(), ranks_before);
  return picked;
}

VectorIndex build_index(std::span<const Chunk> chunks, Embedder& embedder,
                        std::size_t batch_size) {
  if (chunks.empty()) throw RagError("cannot build an index from zero chunks");
  if (batch_size == 0) batch_size = 1;
  std::vector<IndexEntry> entries;
  entries.reserve(chunks.size());
  for (std::size_t begin = 0; begin < chunks.size(); begin += batch_size) {
    const std::size_t end = std::min(begin + batch_size, chunks.size());
    std::vector<std::string> texts;
    for (std::size_t i = begin; i < end; ++i) texts.push_back(chunks[i].text);
    auto vectors = embedder.embed(texts);
    if (vectors.size() != texts.size()) throw RagError("embedder returned wrong vector count");
    for (std::size_t i = begin; i < end; ++i) {
      entries.push_back({chunks[i], std::move(vectors[i - begin])});
    }
  }
  return VectorIndex(embedder.model_name(), std::move(entries));
}

void save_index(const VectorIndex& index, const std::filesystem::path& path) {
  json entries = json::array();
  for (const auto& e : index.entries()) {
    entries.push_back({{"chunk_id", e.chunk.chunk_id},
                       {"source_id", e.chunk.source_id},
                       {"start", e.chunk.start},
                       {"end", e.chunk.end},
                       {"text", e.chunk.text},
                       {"embedding", e.embedding.values}});
  }
  json doc = {{"format", kIndexFormat},
              {"version", kIndexVersion},
              {"embed_model", index.embed_model()},
              {"dim", index.dim()},
              {"fingerprint", index.fingerprint()},
              {"entries", entries}};
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw RagError("cannot write index " + path.string());
    out << doc.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

VectorIndex load_index(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RagError("cannot open index " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw RagError("index " + path.string() + " is not valid JSON: " + e.what());
  }
  if (doc.value("format", "") != kIndexFormat || doc.value("version", 0) != kIndexVersion) {
    throw RagError("index " + path.string() + " has an unsupported format");
  }
  std::vector<IndexEntry> entries;
  for (const auto& e : doc.at("entries")) {
    entries.push_back({{e.at("chunk_id").get<std::string>(), e.at("source_id").get<std::string>(),
                        e.at("start").get<std::size_t>(), e.at("end").get<std::size_t>(),
                        e.at("text").get<std::string>()},
                       {e.at("embedding").get<std::vector<double>>()}});
  }
  VectorIndex index(doc.at("embed_model").get<std::string>(), std::move(entries));
  if (index.dim() != doc.at("dim").get<std::size_t>()) {
    throw RagError("index " + path.string() + " declares the wrong dimension");
  }
  return index;
}

}  // namespace fairaudit::rag
