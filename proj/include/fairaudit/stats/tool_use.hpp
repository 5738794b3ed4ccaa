#pragma once

#include <span>

#include "fairaudit/agents/outputs.hpp"

namespace fairaudit::stats {

/// Fraction of traces with at least one tool invocation.
/// Throws std::invalid_argument for an empty list.
double tool_use_rate(std::span<const agents::AgentTrace> traces);

}  // namespace fairaudit::stats
