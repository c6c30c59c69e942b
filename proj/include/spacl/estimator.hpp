#pragma once

#include <stdexcept>
#include <vector>

#include "spacl/model.hpp"
#include "spacl/spectral.hpp"

namespace spacl {

/// Algorithm defaults: Prune(V, 10, .75, .95).
struct PruneConfig {
  int r = 10;          // neighbor count
  double q = 0.75;     // norm quantile
  double eps = 0.95;   // prune quantile
};

struct EstimatorError : std::runtime_error {
  std::vector<Index> offending;
  explicit EstimatorError(const std::string& msg, std::vector<Index> nodes = {})
      : std::runtime_error(msg), offending(std::move(nodes)) {}
};

/// High-norm rows with anomalously large mean distance to their r nearest
/// neighbors (searched among all rows). Returns the pruned index set,
/// ascending.
std::vector<Index> prune(const Matrix& v_hat, const PruneConfig& config = {});

/// Successive projection: K rounds of max-norm row selection (ties to the
/// lowest index) followed by projection onto the complement of the span of
/// the rows selected so far. Returns indices in selection order.
std::vector<Index> spa(const Matrix& x, int K);

struct FitResult {
  MembershipMatrix theta_hat;
  Matrix B_hat;               // K x K, max entry 1 after scaling
  double rho_hat = 0.0;       // max entry of the unscaled corner product
  std::vector<Index> pure_indices;  // original node ids, selection order
  std::vector<Index> pruned_set;    // ascending
  Spectrum spectrum;
};

struct SpaclOptions {
  EigsOptions eigs;
  double zero_threshold = kZeroThreshold;  // Algorithm step-7 cutoff
};

/// The full pipeline: spectrum, optional pruning, corner finding, and
/// parameter recovery. Membership rows are recovered for every node,
/// including pruned ones; pruning only affects corner selection.
FitResult spacl(const SparseSymmetricGraph& a, int K, const PruneConfig& prune_config = {},
                bool prune_enabled = true, const SpaclOptions& opts = {});
FitResult spacl(const DenseSymmetricMatrix& a, int K, const PruneConfig& prune_config = {},
                bool prune_enabled = true, const SpaclOptions& opts = {});

/// Simulation-only pruning safety diagnostic. Counts epsilon-ball neighbors
/// around the population corners (x_j) and around every high-norm node (z_i)
/// after rotating the empirical rows onto the population frame; m is the
/// fraction of high-norm nodes prunable without dipping below the smallest
/// corner count. High norm means exceeding the largest population row norm
/// by epsilon; m is 1 when that set is empty.
struct DiagnosticReport {
  double s0_fraction = 0.0;  // |S0| / n with S0 = {i : ||Vh_i|| >= y + eps}
  double m = 0.0;            // fraction of S0 with z_i < delta
  Index delta = 0;           // min corner neighbor count
  double epsilon = 0.0;      // ball radius used
  double quantile_fraction = 0.0;  // share of nodes at/above the prune norm quantile
  std::vector<Index> corner_counts;
};

DiagnosticReport pruning_diagnostic(const Matrix& v_hat, const MembershipMatrix& theta,
                                    const Matrix& v_population,
                                    const PruneConfig& prune_config, double epsilon_ball);

/// Orthogonal Procrustes rotation O minimizing ||source O - target||_F.
Matrix procrustes_rotation(const Matrix& source, const Matrix& target);

}  // namespace spacl
