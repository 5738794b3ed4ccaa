#pragma once

#include <span>
#include <string>

#include "fairaudit/gateway/gateway.hpp"

namespace fairaudit::eval {

struct SimilarityScore {
  double value = 0.0;
  std::string embed_model;

  bool operator==(const SimilarityScore&) const = default;
};

/// dot(a, b) / (|a| |b|), clamped to [-1, 1].
/// Throws std::invalid_argument on a dimension mismatch or an all-zero vector.
double cosine(std::span<const double> a, std::span<const double> b);

inline double cosine(const gateway::EmbeddingVector& a, const gateway::EmbeddingVector& b) {
  return cosine(std::span<const double>(a.values), std::span<const double>(b.values));
}

/// Embeds both texts whole with `embed_model` and returns their cosine.
SimilarityScore score_output(const std::string& generated_text,
                             const std::string& ground_truth_text, const std::string& embed_model,
                             gateway::Gateway& gateway);

}  // namespace fairaudit::eval
