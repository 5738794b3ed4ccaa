#pragma once

#include <filesystem>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fairaudit/gateway/gateway.hpp"
#include "fairaudit/rag/chunker.hpp"

namespace fairaudit::rag {

using gateway::EmbeddingVector;

struct IndexEntry {
  Chunk chunk;
  EmbeddingVector embedding;

  bool operator==(const IndexEntry&) const = default;
};

struct RetrievalResult {
  std::string chunk_id;
  std::string source_id;
  double score = 0.0;

  bool operator==(const RetrievalResult&) const = default;
};

inline constexpr std::size_t kUnlimitedPerSource = std::numeric_limits<std::size_t>::max();

/// Something that turns texts into vectors under one model name.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<EmbeddingVector> embed(std::span<const std::string> texts) = 0;
  virtual const std::string& model_name() const = 0;
};

class GatewayEmbedder final : public Embedder {
 public:
  GatewayEmbedder(gateway::Gateway& gateway, std::string model)
      : gateway_(gateway), model_(std::move(model)) {}

  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override {
    return gateway_.embed(model_, texts);
  }
  const std::string& model_name() const override { return model_; }

 private:
  gateway::Gateway& gateway_;
  std::string model_;
};

/// Immutable exact-scan cosine index over chunk embeddings.
class VectorIndex {
 public:
  /// Throws RagError if entries are empty, dims differ, a vector is all
  /// zero, or chunk ids repeat.
  VectorIndex(std::string embed_model, std::vector<IndexEntry> entries);

  const std::string& embed_model() const { return embed_model_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }
  const std::vector<IndexEntry>& entries() const { return entries_; }

  /// Throws RagError for an unknown id.
  const Chunk& chunk(const std::string& chunk_id) const;

  /// Digest of chunk ids, spans and texts; identifies which chunks were embedded.
  std::string fingerprint() const;

  /// Every entry scored against the query, best first, ties by chunk_id.
  std::vector<RetrievalResult> rank_all(const EmbeddingVector& query) const;

  /// Exact top-k by cosine.
  std::vector<RetrievalResult> search(const EmbeddingVector& query, std::size_t k) const;

  /// Top-k preferring distinct sources: a first pass takes results in score
  /// order while skipping sources already holding `per_source_cap` picks; a
  /// second pass fills any shortfall from the skipped results in score order.
  std::vector<RetrievalResult> search_diverse(const EmbeddingVector& query, std::size_t k,
                                              std::size_t per_source_cap) const;

 private:
  std::vector<double> scores(const EmbeddingVector& query) const;

  std::string embed_model_;
  std::vector<IndexEntry> entries_;
  std::vector<double> norms_;
  std::size_t dim_ = 0;
  std::map<std::string, std::size_t, std::less<>> by_id_;
};

/// Score-descending, chunk_id-ascending order used by every result list.
bool ranks_before(const RetrievalResult& a, const RetrievalResult& b);

/// Fingerprint of a chunk list, comparable with VectorIndex::fingerprint().
std::string chunks_fingerprint(std::span<const Chunk> chunks);

/// Embeds every chunk through `embedder` in batches of `batch_size`.
VectorIndex build_index(std::span<const Chunk> chunks, Embedder& embedder,
                        std::size_t batch_size = 32);

void save_index(const VectorIndex& index, const std::filesystem::path& path);
VectorIndex load_index(const std::filesystem::path& path);

}  // namespace fairaudit::rag
