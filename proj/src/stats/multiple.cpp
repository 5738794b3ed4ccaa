#include "fairaudit/stats/multiple.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace fairaudit::stats {

std::vector<double> holm(std::span<const double> p_values) {
  for (double p : p_values) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("holm: p-value outside [0, 1]");
  }
  const std::size_t m = p_values.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });

  std::vector<double> adjusted(m);
  double running = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double scaled = static_cast<double>(m - j) * p_values[order[j]];
    running = std::max(running, scaled);
    adjusted[order[j]] = std::min(running, 1.0);
  }
  return adjusted;
}

}  // namespace fairaudit::stats
