#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace teamprod {

// Linear interpolation between order statistics at position p (n + 1)
// (Hyndman-Fan type 6), clamped to the sample range. `sorted` must be
// ascending and nonempty.
inline double quantile_sorted(std::span<const double> sorted, double p) {
  const double n = static_cast<double>(sorted.size());
  const double h = p * (n + 1.0);
  if (h <= 1.0) return sorted.front();
  if (h >= n) return sorted.back();
  const auto lo = static_cast<std::size_t>(std::floor(h)) - 1;
  return sorted[lo] + (h - std::floor(h)) * (sorted[lo + 1] - sorted[lo]);
}

inline double quantile(std::vector<double> values, double p) {
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, p);
}

inline double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

// Q(dof/2, x/2): upper tail of the chi-square distribution.
double chi2_upper_tail(double x, int dof);

}  // namespace teamprod
