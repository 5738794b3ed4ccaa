#include "fairaudit/stats/tool_use.hpp"

#include <algorithm>
#include <stdexcept>

namespace fairaudit::stats {

double tool_use_rate(std::span<const agents::AgentTrace> traces) {
  if (traces.empty()) throw std::invalid_argument("tool_use_rate of zero traces");
  const auto used = std::count_if(traces.begin(), traces.end(),
                                  [](const auto& t) { return !t.tool_invocations.empty(); });
  return static_cast<double>(used) / static_cast<double>(traces.size());
}

}  // namespace fairaudit::stats
