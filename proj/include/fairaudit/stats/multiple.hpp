#pragma once

#include <span>
#include <vector>

namespace fairaudit::stats {

/// Holm step-down adjustment, returned in input order.
/// Throws std::invalid_argument if any p lies outside [0, 1].
std::vector<double> holm(std::span<const double> p_values);

}  // namespace fairaudit::stats
