#pragma once

#include <cstddef>
#include <span>

namespace fairaudit::stats {

struct DescriptiveStats {
  std::size_t n = 0;
  double mean = 0.0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double iqr = 0.0;
  double min = 0.0;
  double max = 0.0;

  bool operator==(const DescriptiveStats&) const = default;
};

/// Quantile of sorted data by linear interpolation at fractional index (n-1)p.
double quantile_sorted(std::span<const double> sorted, double p);

/// Throws std::invalid_argument for an empty sample or non-finite values.
/// The result does not depend on the order of `values`.
DescriptiveStats descriptives(std::span<const double> values);

}  // namespace fairaudit::stats
