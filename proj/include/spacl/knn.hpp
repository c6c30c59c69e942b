#pragma once

#include <vector>

#include "spacl/types.hpp"

namespace spacl::detail {

/// Mean Euclidean distance from each query row to its r nearest neighbors
/// among all rows of points (the query row itself excluded). Exact for every
/// input size: brute force at small n, k-d tree above, identical results by
/// contract (ties in distance broken by lower row index).
Vector mean_knn_distance(const Matrix& points, const std::vector<Index>& queries, int r);

}  // namespace spacl::detail
