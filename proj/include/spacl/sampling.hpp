#pragma once

#include <cstdint>

#include "spacl/model.hpp"

namespace spacl {

enum class PurePlacement { kFirstKRows, kRandomRows };

/// The seed fully determines every sampler output; each node row draws from
/// its own sub-stream so row-parallel generation stays reproducible.
struct SamplerConfig {
  std::uint64_t seed = 1;
  bool inject_pure = true;
  PurePlacement pure_placement = PurePlacement::kFirstKRows;
};

/// Dirichlet(alpha) membership rows; when inject_pure is set, K designated
/// rows are overwritten with the K standard basis vectors (one per
/// community) and recorded in pure_rows.
MembershipMatrix sample_theta(const ModelParams& params, const SamplerConfig& config);

/// P = rho * Theta B Theta^T.
DenseSymmetricMatrix build_population_matrix(const MembershipMatrix& theta,
                                             const ModelParams& params);

/// Bernoulli(P_ij) over unordered pairs i < j; diagonal excluded.
SparseSymmetricGraph sample_adjacency(const DenseSymmetricMatrix& P,
                                      const SamplerConfig& config);

/// Same Bernoulli semantics without materializing P: row probabilities are
/// streamed from Theta. Intended for n > 20000 but valid at any size.
SparseSymmetricGraph sample_adjacency(const MembershipMatrix& theta,
                                      const ModelParams& params,
                                      const SamplerConfig& config);

}  // namespace spacl
