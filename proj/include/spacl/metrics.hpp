#pragma once

#include <vector>

#include "spacl/model.hpp"
#include "spacl/spectral.hpp"

namespace spacl {

struct AlignmentResult {
  std::vector<int> permutation;  // est column a matches truth column permutation[a]
  double cost = 0.0;             // sum of squared column distances at the optimum
};

/// Column matching minimizing ||Theta_hat - Theta Pi||_F: exhaustive for
/// K <= 8, optimal assignment above (identical optimum, the objective is
/// assignment-separable).
AlignmentResult align_columns(const Matrix& theta_hat, const Matrix& theta);

/// min over permutations of ||Theta_hat - Theta Pi||_F / ||Theta||_F.
double relative_frobenius_error(const Matrix& theta_hat, const Matrix& theta);

struct RowwiseErrorReport {
  double max_relative_error = 0.0;  // over non-zeroed rows, after alignment
  Index zeroed_rows = 0;            // excluded rows, reported separately
};

RowwiseErrorReport max_rowwise_relative_error(const MembershipMatrix& theta_hat,
                                              const Matrix& theta);

/// Averaged Spearman rank correlation, maximized over community matchings.
/// Ties get average ranks; a constant column contributes RC = 0.
double rc_avg(const Matrix& theta_hat, const Matrix& theta);

struct DeviationReport {
  double max_row_deviation = 0.0;           // max_i ||e_i (VhVh' - VV')||
  double max_relative_row_deviation = 0.0;  // same, over ||e_i V||
  double delocalization_max = 0.0;          // max_i ||e_i V||^2 (population)
  double delocalization_min = 0.0;          // min_i ||e_i V||^2
  bool delocalization_upper_ok = false;              // deloc_max <= 2 nu (1+alpha0) / n
  bool delocalization_lower_ok = false;              // deloc_min >= 2 / (3n)
};

/// Row-wise projection deviations between empirical and population
/// eigenspaces, assembled row by row (no n x n matrices).
DeviationReport eigen_deviation_report(const Spectrum& a_spectrum,
                                       const Spectrum& p_spectrum,
                                       const MembershipMatrix& theta,
                                       const ModelParams& params);

namespace detail {

/// Minimum-cost bijection on a square cost matrix (shortest augmenting
/// paths); returns column assigned to each row.
std::vector<int> solve_assignment(const Matrix& cost);

/// Spearman rank correlation with average-rank ties; 0 when either side has
/// zero rank variance.
double spearman(const Vector& x, const Vector& y);

}  // namespace detail

}  // namespace spacl
