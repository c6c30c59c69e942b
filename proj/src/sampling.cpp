#include "spacl/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "spacl/rng.hpp"

namespace spacl {

namespace {

// Dirichlet row via normalized Gamma draws, done in log space so that tiny
// alphas (the SBM limit) normalize cleanly instead of hitting 0/0.
void dirichlet_row(rng::Engine& eng, const Vector& alpha, Vector& out) {
  const Index K = alpha.size();
  out.resize(K);
  if (K == 1) {
    out[0] = 1.0;
    return;
  }
  double mx = -std::numeric_limits<double>::infinity();
  for (Index j = 0; j < K; ++j) {
    out[j] = rng::log_gamma_draw(eng, alpha[j]);
    mx = std::max(mx, out[j]);
  }
  double denom = 0.0;
  for (Index j = 0; j < K; ++j) {
    out[j] = std::exp(out[j] - mx);
    denom += out[j];
  }
  out /= denom;
}

// Skips ahead geometrically through candidate slots, each a Bernoulli(bound)
// proposal thinned to the target probability by the caller.
struct GeometricSkipper {
  double log1m_bound;
  explicit GeometricSkipper(double bound) : log1m_bound(std::log1p(-bound)) {}
  // Number of slots to skip before the next proposal (0 = next slot).
  std::int64_t next(rng::Engine& eng) const {
    if (!(log1m_bound < 0.0)) return std::numeric_limits<std::int64_t>::max();
    double u = rng::uniform01(eng);
    while (u <= 0.0) u = rng::uniform01(eng);
    const double t = std::floor(std::log(u) / log1m_bound);
    if (t >= 9.2e18) return std::numeric_limits<std::int64_t>::max();
    return static_cast<std::int64_t>(t);
  }
};

template <typename RowProb>
SparseSymmetricGraph sample_pairs(std::int64_t n, const SamplerConfig& config,
                                  double global_bound, RowProb&& prob) {
  std::vector<std::pair<std::int32_t, std::int32_t>> edges;
  for (std::int64_t i = 0; i + 1 < n; ++i) {
    rng::Engine eng(rng::derive_seed(config.seed, static_cast<std::uint64_t>(i),
                                     rng::kTagAdjacency));
    const double bound = std::min(1.0, global_bound);
    if (bound <= 0.0) continue;
    if (bound >= 1.0 - 1e-15) {
      for (std::int64_t j = i + 1; j < n; ++j) {
        const double p = prob(i, j);
        if (p >= 1.0 || rng::uniform01(eng) < p)
          edges.emplace_back(static_cast<std::int32_t>(i), static_cast<std::int32_t>(j));
      }
      continue;
    }
    GeometricSkipper skip(bound);
    std::int64_t j = i + 1;
    for (;;) {
      const std::int64_t step = skip.next(eng);
      if (step > n - 1 - j) break;
      j += step;
      const double p = prob(i, j);
      if (p > 0.0 && rng::uniform01(eng) < p / bound)
        edges.emplace_back(static_cast<std::int32_t>(i), static_cast<std::int32_t>(j));
      if (++j >= n) break;
    }
  }
  return SparseSymmetricGraph::from_edges(n, std::move(edges));
}

}  // namespace

MembershipMatrix sample_theta(const ModelParams& params, const SamplerConfig& config) {
  const std::int64_t n = params.n();
  const int K = params.K();
  Matrix theta(n, K);
  Vector row(K);
  for (std::int64_t i = 0; i < n; ++i) {
    rng::Engine eng(rng::derive_seed(config.seed, static_cast<std::uint64_t>(i), rng::kTagTheta));
    dirichlet_row(eng, params.alpha(), row);
    theta.row(i) = row.transpose();
  }

  std::vector<Index> pure_rows;
  if (config.inject_pure) {
    if (n < K) throw ValueError("sample_theta: inject_pure requires n >= K");
    pure_rows.resize(static_cast<size_t>(K));
    if (config.pure_placement == PurePlacement::kFirstKRows) {
      std::iota(pure_rows.begin(), pure_rows.end(), Index{0});
    } else {
      // Partial Fisher-Yates over [0, n) for K distinct rows.
      rng::Engine eng(rng::derive_seed(config.seed, 0, rng::kTagPurePlacement));
      std::vector<Index> ids(static_cast<size_t>(n));
      std::iota(ids.begin(), ids.end(), Index{0});
      for (int j = 0; j < K; ++j) {
        const auto pick = j + static_cast<Index>(eng() % static_cast<std::uint64_t>(n - j));
        std::swap(ids[static_cast<size_t>(j)], ids[static_cast<size_t>(pick)]);
        pure_rows[static_cast<size_t>(j)] = ids[static_cast<size_t>(j)];
      }
    }
    for (int j = 0; j < K; ++j) {
      theta.row(pure_rows[static_cast<size_t>(j)]).setZero();
      theta(pure_rows[static_cast<size_t>(j)], j) = 1.0;
    }
  }
  return MembershipMatrix(std::move(theta), std::move(pure_rows));
}

DenseSymmetricMatrix build_population_matrix(const MembershipMatrix& theta,
                                             const ModelParams& params) {
  if (theta.K() != params.K())
    throw DimensionError("build_population_matrix: community count mismatch");
  const Matrix& T = theta.theta();
  Matrix P = params.rho() * (T * params.B() * T.transpose());
  // Clean round-off asymmetry before the symmetric wrapper validates.
  P = ((P + P.transpose()) * 0.5).eval();
  return DenseSymmetricMatrix(std::move(P));
}

SparseSymmetricGraph sample_adjacency(const DenseSymmetricMatrix& P,
                                      const SamplerConfig& config) {
  const Matrix& M = P.matrix();
  if (M.size() > 0 && (M.minCoeff() < 0.0 || M.maxCoeff() > 1.0))
    throw ValueError("sample_adjacency: entries must lie in [0, 1]");
  const double bound = M.size() > 0 ? M.maxCoeff() : 0.0;
  return sample_pairs(M.rows(), config, bound,
                      [&M](std::int64_t i, std::int64_t j) { return M(i, j); });
}

SparseSymmetricGraph sample_adjacency(const MembershipMatrix& theta,
                                      const ModelParams& params,
                                      const SamplerConfig& config) {
  if (theta.K() != params.K())
    throw DimensionError("sample_adjacency: community count mismatch");
  const Matrix& T = theta.theta();
  // Row probabilities stream through Theta B; P_ij <= rho because max B = 1.
  const Matrix TB = T * params.B();
  const double rho = params.rho();
  return sample_pairs(T.rows(), config, rho,
                      [&](std::int64_t i, std::int64_t j) {
                        return rho * TB.row(i).dot(T.row(j));
                      });
}

}  // namespace spacl
