#pragma once

#include <span>
#include <vector>

namespace fairaudit::stats {

/// Ranks 1..n; tied values share the mean of their rank positions.
std::vector<double> midrank(std::span<const double> values);

/// Sum of t^3 - t over tie groups of size t.
double tie_term(std::span<const double> values);

struct OmnibusResult {
  double h = 0.0;
  int df = 0;
  double p = 1.0;
};

/// Kruskal-Wallis H with tie correction; p from chi-square with k-1 df.
/// When every observation is identical, H = 0 and p = 1.
/// Throws std::invalid_argument for fewer than two groups or an empty group.
OmnibusResult kruskal_wallis(std::span<const std::vector<double>> groups);

struct MannWhitneyResult {
  /// U of the first sample: R_x - n_x (n_x + 1) / 2.
  double u = 0.0;
  double p = 1.0;
  bool exact = false;
};

/// Largest per-sample size that still uses the exact permutation branch.
inline constexpr std::size_t kExactMaxSampleSize = 8;

/// Two-sided Wilcoxon rank-sum / Mann-Whitney test.
///
/// Both samples of size <= 8 and no ties: exact p by enumerating every
/// C(n_x + n_y, n_x) assignment of ranks. Otherwise: normal approximation
/// with continuity correction and tie-corrected variance; zero variance
/// gives p = 1.
MannWhitneyResult mann_whitney_two_sided(std::span<const double> x, std::span<const double> y);

}  // namespace fairaudit::stats
