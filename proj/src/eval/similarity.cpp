#include "fairaudit/eval/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fairaudit::eval {

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("cosine: dimension mismatch " + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw std::invalid_argument("cosine: zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

SimilarityScore score_output(const std::string& generated_text,
                             const std::string& ground_truth_text, const std::string& embed_model,
                             gateway::Gateway& gateway) {
  if (generated_text.empty() || ground_truth_text.empty()) {
    throw std::invalid_argument("score_output: texts must be nonempty");
  }
  const std::string texts[] = {generated_text, ground_truth_text};
  const auto vectors = gateway.embed(embed_model, texts);
  return {cosine(vectors[0], vectors[1]), embed_model};
}

}  // namespace fairaudit::eval
