#include "spacl/estimator.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spacl/knn.hpp"
#include "spacl/stats.hpp"

namespace spacl {

namespace {

Index argmax_norm(const Matrix& rows) {
  Index best = 0;
  double best_norm = rows.row(0).squaredNorm();
  for (Index i = 1; i < rows.rows(); ++i) {
    const double nrm = rows.row(i).squaredNorm();
    if (nrm > best_norm) {
      best_norm = nrm;
      best = i;
    }
  }
  return best;
}

}  // namespace

std::vector<Index> prune(const Matrix& v_hat, const PruneConfig& config) {
  const Index n = v_hat.rows();
  if (config.r < 1) throw EstimatorError("prune: r must be >= 1");
  if (n <= config.r) throw EstimatorError("prune: needs more rows than neighbors");
  if (!(config.q > 0.0 && config.q < 1.0) || !(config.eps > 0.0 && config.eps < 1.0))
    throw EstimatorError("prune: q and eps must lie in (0, 1)");

  std::vector<double> norms(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) norms[static_cast<size_t>(i)] = v_hat.row(i).norm();
  const double norm_cut = lower_quantile(norms, config.q);

  std::vector<Index> s0;
  for (Index i = 0; i < n; ++i)
    if (norms[static_cast<size_t>(i)] >= norm_cut) s0.push_back(i);

  const Vector x = detail::mean_knn_distance(v_hat, s0, config.r);
  const double x_cut =
      lower_quantile({x.data(), x.data() + x.size()}, 1.0 - config.eps);

  std::vector<Index> pruned;
  for (size_t j = 0; j < s0.size(); ++j)
    if (x[static_cast<Index>(j)] >= x_cut) pruned.push_back(s0[j]);
  return pruned;
}

std::vector<Index> spa(const Matrix& x, int K) {
  if (K < 1) throw ValueError("spa: K must be >= 1");
  if (x.rows() < K) throw DimensionError("spa: fewer rows than K");
  Matrix residual = x;
  std::vector<Index> selected;
  selected.reserve(static_cast<size_t>(K));
  for (int k = 0; k < K; ++k) {
    const Index pick = argmax_norm(residual);
    const double nrm = residual.row(pick).norm();
    if (nrm < 1e-12)
      throw EstimatorError("spa: residual rank deficient after " +
                               std::to_string(k) + " picks",
                           selected);
    const Eigen::RowVectorXd u = residual.row(pick) / nrm;
    residual -= (residual * u.transpose()) * u;
    selected.push_back(pick);
  }
  return selected;
}

namespace {

FitResult spacl_core(Spectrum spectrum, int K, const PruneConfig& prune_config,
                     bool prune_enabled, const SpaclOptions& opts) {
  const Matrix& v_hat = spectrum.eigenvectors;
  const Index n = v_hat.rows();

  std::vector<Index> pruned;
  if (prune_enabled) pruned = prune(v_hat, prune_config);
  if (n - static_cast<Index>(pruned.size()) < K)
    throw EstimatorError("spacl: pruning removed too many rows");

  std::vector<Index> keep;
  keep.reserve(static_cast<size_t>(n) - pruned.size());
  {
    size_t p = 0;
    for (Index i = 0; i < n; ++i) {
      if (p < pruned.size() && pruned[p] == i) {
        ++p;
        continue;
      }
      keep.push_back(i);
    }
  }

  Matrix x(static_cast<Index>(keep.size()), K);
  for (size_t i = 0; i < keep.size(); ++i) x.row(static_cast<Index>(i)) = v_hat.row(keep[i]);

  const std::vector<Index> picks = spa(x, K);
  std::vector<Index> pure;
  pure.reserve(picks.size());
  for (Index p : picks) pure.push_back(keep[static_cast<size_t>(p)]);

  Matrix x_p(K, K);
  for (int k = 0; k < K; ++k) x_p.row(k) = v_hat.row(pure[static_cast<size_t>(k)]);

  {
    Eigen::JacobiSVD<Matrix> svd(x_p);
    const double smin = svd.singularValues().tail(1)(0);
    const double smax = svd.singularValues()(0);
    if (!(smin > 0.0) || smax / smin > kConditionLimit)
      throw EstimatorError("spacl: selected corner matrix is numerically singular", pure);
  }

  // Theta = V x_p^{-1}, computed as a K x K solve against all rows.
  Eigen::PartialPivLU<Matrix> lu(x_p.transpose());
  Matrix theta = lu.solve(v_hat.transpose()).transpose();

  // Step 7: clip negatives, zero tiny entries, renormalize surviving rows.
  std::vector<std::uint8_t> zeroed(static_cast<size_t>(n), 0);
  for (Index i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int j = 0; j < K; ++j) {
      double v = theta(i, j);
      if (v < opts.zero_threshold) v = 0.0;
      theta(i, j) = v;
      sum += v;
    }
    if (sum == 0.0)
      zeroed[static_cast<size_t>(i)] = 1;
    else
      theta.row(i) /= sum;
  }
  bool any_zeroed = std::any_of(zeroed.begin(), zeroed.end(), [](auto f) { return f != 0; });

  std::vector<Index> basis_rows;
  for (Index p : pure) {
    Index nonzero = 0;
    bool unit = true;
    for (int j = 0; j < K; ++j) {
      if (theta(p, j) != 0.0) {
        ++nonzero;
        unit = unit && theta(p, j) == 1.0;
      }
    }
    if (nonzero == 1 && unit) basis_rows.push_back(p);
  }

  Matrix b_unscaled = x_p * spectrum.eigenvalues.asDiagonal() * x_p.transpose();
  b_unscaled = ((b_unscaled + b_unscaled.transpose()) * 0.5).eval();
  const double rho_hat = b_unscaled.maxCoeff();
  if (!(rho_hat > 0.0))
    throw EstimatorError("spacl: recovered affinity matrix has no positive entry", pure);

  FitResult result{
      MembershipMatrix(std::move(theta), std::move(basis_rows),
                       any_zeroed ? std::move(zeroed) : std::vector<std::uint8_t>{}),
      b_unscaled / rho_hat,
      rho_hat,
      std::move(pure),
      std::move(pruned),
      std::move(spectrum)};
  return result;
}

}  // namespace

FitResult spacl(const SparseSymmetricGraph& a, int K, const PruneConfig& prune_config,
                bool prune_enabled, const SpaclOptions& opts) {
  if (a.n() == 0) throw EstimatorError("spacl: empty graph");
  if (K > a.n()) throw EstimatorError("spacl: K exceeds node count");
  return spacl_core(top_k_eigs(a, K, opts.eigs), K, prune_config, prune_enabled, opts);
}

FitResult spacl(const DenseSymmetricMatrix& a, int K, const PruneConfig& prune_config,
                bool prune_enabled, const SpaclOptions& opts) {
  if (a.n() == 0) throw EstimatorError("spacl: empty matrix");
  if (K > a.n()) throw EstimatorError("spacl: K exceeds node count");
  return spacl_core(top_k_eigs(a, K, opts.eigs), K, prune_config, prune_enabled, opts);
}

Matrix procrustes_rotation(const Matrix& source, const Matrix& target) {
  if (source.rows() != target.rows() || source.cols() != target.cols())
    throw DimensionError("procrustes_rotation: shape mismatch");
  Eigen::JacobiSVD<Matrix> svd(source.transpose() * target,
                               Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

DiagnosticReport pruning_diagnostic(const Matrix& v_hat, const MembershipMatrix& theta,
                                    const Matrix& v_population,
                                    const PruneConfig& prune_config, double epsilon_ball) {
  const Index n = v_hat.rows();
  const int K = theta.K();
  if (v_population.rows() != K || v_population.cols() != v_hat.cols())
    throw DimensionError("pruning_diagnostic: corner matrix must be K x K");

  // Population rows and the rotation taking the empirical rows onto them.
  const Matrix v_pop_rows = theta.theta() * v_population;
  const Matrix rot = procrustes_rotation(v_hat, v_pop_rows);
  const Matrix v_rot = v_hat * rot;

  double eps = epsilon_ball;
  if (!(eps > 0.0)) {
    // Ball radius per the reference recipe: median row-wise deviation from
    // the rotated population counterpart.
    std::vector<double> dev(static_cast<size_t>(n));
    for (Index i = 0; i < n; ++i)
      dev[static_cast<size_t>(i)] = (v_rot.row(i) - v_pop_rows.row(i)).norm();
    eps = median(std::move(dev));
  }

  std::vector<double> norms(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) norms[static_cast<size_t>(i)] = v_hat.row(i).norm();
  const double norm_cut = lower_quantile(norms, prune_config.q);
  Index above_quantile = 0;
  for (double nrm : norms) above_quantile += nrm >= norm_cut;

  // High-norm strays: empirical rows poking out past the largest population
  // row norm (which sits at a corner) by more than the ball radius.
  double y = 0.0;
  for (Index i = 0; i < n; ++i) y = std::max(y, v_pop_rows.row(i).norm());
  std::vector<Index> s0;
  for (Index i = 0; i < n; ++i)
    if (norms[static_cast<size_t>(i)] >= y + eps) s0.push_back(i);

  DiagnosticReport rep;
  rep.epsilon = eps;
  rep.s0_fraction = static_cast<double>(s0.size()) / static_cast<double>(n);
  rep.quantile_fraction = static_cast<double>(above_quantile) / static_cast<double>(n);
  rep.corner_counts.resize(static_cast<size_t>(K), 0);
  const double eps2 = eps * eps;
  for (int j = 0; j < K; ++j) {
    Index count = 0;
    for (Index i = 0; i < n; ++i)
      if ((v_rot.row(i) - v_population.row(j)).squaredNorm() <= eps2) ++count;
    rep.corner_counts[static_cast<size_t>(j)] = count;
  }
  rep.delta = *std::min_element(rep.corner_counts.begin(), rep.corner_counts.end());

  Index prunable = 0;
  for (Index i : s0) {
    Index z = 0;
    for (Index k = 0; k < n; ++k)
      if ((v_rot.row(k) - v_rot.row(i)).squaredNorm() <= eps2) ++z;
    if (z < rep.delta) ++prunable;
  }
  rep.m = s0.empty() ? 1.0 : static_cast<double>(prunable) / static_cast<double>(s0.size());
  return rep;
}

}  // namespace spacl
