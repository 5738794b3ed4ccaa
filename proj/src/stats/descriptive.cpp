#include "fairaudit/stats/descriptive.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace fairaudit::stats {

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
  const double pos = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

DescriptiveStats descriptives(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("descriptives of an empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  for (double v : sorted) {
    if (!std::isfinite(v)) throw std::invalid_argument("sample contains a non-finite value");
  }
  std::sort(sorted.begin(), sorted.end());

  DescriptiveStats d;
  d.n = sorted.size();
  // Summed in sorted order so the mean is permutation-invariant to the bit.
  double sum = 0.0;
  for (double v : sorted) sum += v;
  d.mean = sum / static_cast<double>(d.n);
  d.median = quantile_sorted(sorted, 0.5);
  d.q1 = quantile_sorted(sorted, 0.25);
  d.q3 = quantile_sorted(sorted, 0.75);
  d.iqr = d.q3 - d.q1;
  d.min = sorted.front();
  d.max = sorted.back();
  return d;
}

}  // namespace fairaudit::stats
