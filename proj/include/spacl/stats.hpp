#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "spacl/types.hpp"

namespace spacl {

/// Lower empirical quantile: the smallest sample value whose empirical CDF
/// reaches the level. Fixed convention across the whole library.
inline double lower_quantile(std::vector<double> values, double level) {
  if (values.empty()) throw ValueError("lower_quantile: empty sample");
  if (!(level > 0.0) || level > 1.0) throw ValueError("lower_quantile: level must be in (0, 1]");
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  auto k = static_cast<std::ptrdiff_t>(std::ceil(level * n)) - 1;
  k = std::clamp<std::ptrdiff_t>(k, 0, static_cast<std::ptrdiff_t>(values.size()) - 1);
  return values[static_cast<size_t>(k)];
}

inline double median(std::vector<double> values) {
  if (values.empty()) throw ValueError("median: empty sample");
  const size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  if (values.size() % 2 == 1) return values[mid];
  const double hi = values[mid];
  const double lo = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

}  // namespace spacl
