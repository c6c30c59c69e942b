#include <doctest.h>

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <random>

#include "spacl/estimator.hpp"
#include "spacl/metrics.hpp"
#include "spacl/sampling.hpp"
#include "spacl/spectral.hpp"
#include "spacl/stats.hpp"

using namespace spacl;

namespace {

Matrix offdiag_B(int K, double diag, double off) {
  Matrix b = Matrix::Constant(K, K, off);
  b.diagonal().setConstant(diag);
  return b;
}

ModelParams fig1_params(double rho, std::int64_t n = 5000) {
  return ModelParams(n, 3, Vector::Constant(3, 0.4), offdiag_B(3, 1.0, 0.001), rho);
}

Matrix corner_matrix(const MembershipMatrix& theta, const Spectrum& population) {
  const int K = theta.K();
  Matrix corners(K, K);
  for (int j = 0; j < K; ++j)
    corners.row(j) = population.eigenvectors.row(theta.pure_rows()[static_cast<size_t>(j)]);
  return corners;
}

}  // namespace

TEST_CASE("prune defaults are pinned") {
  const PruneConfig config;
  CHECK(config.r == 10);
  CHECK(config.q == 0.75);
  CHECK(config.eps == 0.95);
}

TEST_CASE("prune: identical rows keep the whole tie set") {
  Matrix v(100, 3);
  v.setZero();
  v.col(0).setConstant(1.0);
  const auto pruned = prune(v);
  CHECK(pruned.size() == 100);
}

TEST_CASE("prune: an isolated outlier is always pruned") {
  Matrix v = Matrix::Zero(100, 2);
  v(37, 0) = 10.0;
  const auto pruned = prune(v);
  CHECK(std::find(pruned.begin(), pruned.end(), 37) != pruned.end());
}

TEST_CASE("prune: rejects r >= n") {
  Matrix v = Matrix::Random(5, 2);
  PruneConfig config;
  config.r = 5;
  CHECK_THROWS_AS(prune(v, config), EstimatorError);
}

TEST_CASE("prune keeps nodes closer to the population simplex") {
  // Pruned high-norm nodes should sit farther from their population rows
  // than the retained high-norm nodes, on most seeds.
  const auto params = fig1_params(0.007);
  int wins = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SamplerConfig config{seed};
    const auto theta = sample_theta(params, config);
    const auto graph = sample_adjacency(theta, params, config);
    const auto spectrum = top_k_eigs(graph, 3);
    const auto population = population_spectrum(theta, params);

    const Matrix rot = procrustes_rotation(spectrum.eigenvectors, population.eigenvectors);
    const Matrix rotated = spectrum.eigenvectors * rot;

    std::vector<double> norms(static_cast<size_t>(rotated.rows()));
    for (Index i = 0; i < rotated.rows(); ++i)
      norms[static_cast<size_t>(i)] = spectrum.eigenvectors.row(i).norm();
    const double cut = lower_quantile(norms, PruneConfig{}.q);

    const auto pruned = prune(spectrum.eigenvectors);
    std::vector<bool> is_pruned(static_cast<size_t>(rotated.rows()), false);
    for (Index i : pruned) is_pruned[static_cast<size_t>(i)] = true;

    double pruned_dist = 0.0, kept_dist = 0.0;
    int pruned_count = 0, kept_count = 0;
    for (Index i = 0; i < rotated.rows(); ++i) {
      if (norms[static_cast<size_t>(i)] < cut) continue;
      const double d = (rotated.row(i) - population.eigenvectors.row(i)).norm();
      if (is_pruned[static_cast<size_t>(i)]) {
        pruned_dist += d;
        ++pruned_count;
      } else {
        kept_dist += d;
        ++kept_count;
      }
    }
    REQUIRE(pruned_count > 0);
    REQUIRE(kept_count > 0);
    if (pruned_dist / pruned_count > kept_dist / kept_count) ++wins;
  }
  CHECK(wins >= 8);
}

TEST_CASE("spa: identity input returns 0..K-1 with the tie rule") {
  const auto picks = spa(Matrix::Identity(4, 4), 4);
  CHECK(picks[0] == 0);
  std::vector<Index> sorted = picks;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<Index>{0, 1, 2, 3});
}

TEST_CASE("spa: recovers injected pure nodes on noiseless geometry") {
  std::mt19937_64 eng(42);
  for (int trial = 0; trial < 10; ++trial) {
    const int K = 2 + static_cast<int>(eng() % 3);
    ModelParams params(200, K, Vector::Constant(K, 0.5), offdiag_B(K, 1.0, 0.15), 0.5);
    SamplerConfig config{1000 + static_cast<std::uint64_t>(trial), true,
                         PurePlacement::kRandomRows};
    const auto theta = sample_theta(params, config);
    const auto population = population_spectrum(theta, params);
    auto picks = spa(population.eigenvectors, K);
    std::sort(picks.begin(), picks.end());
    auto expected = theta.pure_rows();
    std::sort(expected.begin(), expected.end());
    CHECK(picks == expected);
  }
}

TEST_CASE("spa: rank deficiency fails with the partial selection") {
  Matrix x(5, 3);
  for (Index i = 0; i < 5; ++i) x.row(i) << 1.0, 2.0, 3.0;
  CHECK_THROWS_AS(spa(x, 2), EstimatorError);
}

TEST_CASE("spa: perturbation bound from the separable-NMF guarantee") {
  // Corners as rows, interior points as convex combinations, perturbation
  // below the stated threshold: every pick lands within
  // eps * (1 + 80 K(W)^2 / sigma_K(W)^2) of a distinct corner.
  std::mt19937_64 eng(7);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const int K = 3, n = 200;
  Matrix corners(K, K);
  corners << 2.0, 0.1, 0.0, 0.1, 1.5, 0.2, 0.0, 0.3, 1.8;

  Matrix theta(n, K);
  for (int j = 0; j < K; ++j) theta.row(j) = Vector::Unit(K, j).transpose();
  for (int i = K; i < n; ++i) {
    Vector w(K);
    for (int j = 0; j < K; ++j) w[j] = -std::log(1.0 - unif(eng));
    theta.row(i) = (w / w.sum()).transpose();
  }
  const Matrix x = theta * corners;

  Eigen::JacobiSVD<Matrix> svd(corners);
  const double sigma_r = svd.singularValues().tail(1)(0);
  double kw = 0.0;
  for (int j = 0; j < K; ++j) kw = std::max(kw, corners.row(j).norm());
  const double cond_term = 1.0 + 80.0 * kw * kw / (sigma_r * sigma_r);
  const double eps_limit =
      sigma_r * std::min(1.0 / (2.0 * std::sqrt(K - 1.0)), 0.25) / cond_term;
  const double eps = 0.5 * eps_limit;

  Matrix noisy = x;
  for (int i = 0; i < n; ++i) {
    Vector d(K);
    for (int j = 0; j < K; ++j) d[j] = gauss(eng);
    noisy.row(i) += (eps * d.normalized()).transpose();
  }

  const auto picks = spa(noisy, K);
  const double bar_eps = eps * cond_term;
  std::vector<bool> used(static_cast<size_t>(K), false);
  for (Index pick : picks) {
    double best = std::numeric_limits<double>::infinity();
    int best_corner = -1;
    for (int j = 0; j < K; ++j) {
      if (used[static_cast<size_t>(j)]) continue;
      const double d = (noisy.row(pick) - corners.row(j)).norm();
      if (d < best) {
        best = d;
        best_corner = j;
      }
    }
    REQUIRE(best_corner >= 0);
    used[static_cast<size_t>(best_corner)] = true;
    CHECK(best <= bar_eps);
  }
}

TEST_CASE("spacl: exact recovery from the population matrix") {
  ModelParams params(200, 3, Vector::Constant(3, 0.4), offdiag_B(3, 1.0, 0.1), 0.3);
  const auto theta = sample_theta(params, SamplerConfig{8});
  const auto p = build_population_matrix(theta, params);
  const auto fit = spacl::spacl(p, 3, PruneConfig{}, false);

  CHECK(relative_frobenius_error(fit.theta_hat.theta(), theta.theta()) <= 1e-8);

  const auto align = align_columns(fit.theta_hat.theta(), theta.theta());
  Matrix permuted_b(3, 3);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      permuted_b(a, b) = params.B()(align.permutation[static_cast<size_t>(a)],
                                    align.permutation[static_cast<size_t>(b)]);
  CHECK((fit.rho_hat * fit.B_hat - params.rho() * permuted_b).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK(fit.theta_hat.zeroed_count() == 0);
}

TEST_CASE("spacl: scaling fixes max B_hat at one and keeps the product") {
  const auto params = fig1_params(0.03, 600);
  SamplerConfig config{3};
  const auto theta = sample_theta(params, config);
  const auto graph = sample_adjacency(theta, params, config);
  const auto fit = spacl::spacl(graph, 3);

  CHECK(fit.B_hat.maxCoeff() == doctest::Approx(1.0).epsilon(1e-12));

  Matrix x_p(3, 3);
  for (int k = 0; k < 3; ++k)
    x_p.row(k) = fit.spectrum.eigenvectors.row(fit.pure_indices[static_cast<size_t>(k)]);
  Matrix unscaled = x_p * fit.spectrum.eigenvalues.asDiagonal() * x_p.transpose();
  unscaled = ((unscaled + unscaled.transpose()) * 0.5).eval();
  CHECK((fit.rho_hat * fit.B_hat - unscaled).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(fit.rho_hat == doctest::Approx(unscaled.maxCoeff()).epsilon(1e-15));

  // Pure picks never overlap the pruned set.
  for (Index p : fit.pure_indices)
    CHECK(std::find(fit.pruned_set.begin(), fit.pruned_set.end(), p) == fit.pruned_set.end());
}

TEST_CASE("spacl: community relabeling leaves the aligned error unchanged") {
  ModelParams params(150, 3, Vector::Constant(3, 0.5), offdiag_B(3, 1.0, 0.2), 0.4);
  const auto theta = sample_theta(params, SamplerConfig{12});
  const auto p = build_population_matrix(theta, params);
  const auto fit = spacl::spacl(p, 3, PruneConfig{}, false);

  Matrix relabeled = theta.theta();
  relabeled.col(0).swap(relabeled.col(2));
  const double e1 = relative_frobenius_error(fit.theta_hat.theta(), theta.theta());
  const double e2 = relative_frobenius_error(fit.theta_hat.theta(), relabeled);
  CHECK(std::abs(e1 - e2) <= 1e-12);
}

TEST_CASE("spacl: threshold toggle changes no zeroed rows on noiseless input") {
  ModelParams params(120, 3, Vector::Constant(3, 0.5), offdiag_B(3, 1.0, 0.2), 0.4);
  const auto theta = sample_theta(params, SamplerConfig{19});
  const auto p = build_population_matrix(theta, params);

  SpaclOptions with_threshold;
  SpaclOptions no_threshold;
  no_threshold.zero_threshold = 0.0;
  const auto fit1 = spacl::spacl(p, 3, PruneConfig{}, false, with_threshold);
  const auto fit2 = spacl::spacl(p, 3, PruneConfig{}, false, no_threshold);
  CHECK(fit1.theta_hat.zeroed_count() == 0);
  CHECK(fit2.theta_hat.zeroed_count() == 0);
}

TEST_CASE("prune and spa are invariant to the projection representation") {
  std::mt19937_64 eng(77);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 60 + static_cast<Index>(eng() % 140);
    std::vector<std::pair<std::int32_t, std::int32_t>> edges;
    for (std::int32_t i = 0; i < n; ++i)
      for (std::int32_t j = i + 1; j < n; ++j)
        if (unif(eng) < 0.1) edges.emplace_back(i, j);
    auto g = SparseSymmetricGraph::from_edges(n, std::move(edges));
    const auto s = top_k_eigs(g, 3);
    const Matrix proj = s.eigenvectors * s.eigenvectors.transpose();

    PruneConfig config;
    config.r = 5;
    CHECK(prune(s.eigenvectors, config) == prune(proj, config));
    CHECK(spa(s.eigenvectors, 3) == spa(proj, 3));
  }
}

TEST_CASE("pruning diagnostic: all-pure noiseless census") {
  // 10/20/30 pure nodes per community; every row sits exactly on a corner,
  // so each corner ball holds its community, no empirical row pokes past
  // the corner norms, and nothing needs pruning.
  const int sizes[3] = {10, 20, 30};
  const Index n = 60;
  Matrix t = Matrix::Zero(n, 3);
  Index row = 0;
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < sizes[c]; ++i) t(row++, c) = 1.0;
  MembershipMatrix theta(t, {0, 10, 30});

  ModelParams params(n, 3, Vector::Constant(3, 0.4), offdiag_B(3, 1.0, 0.1), 0.5);
  const auto population = population_spectrum(theta, params);
  const Matrix corners = corner_matrix(theta, population);

  const auto rep = pruning_diagnostic(population.eigenvectors, theta, corners,
                                      PruneConfig{}, 1e-8);
  CHECK(rep.quantile_fraction >= 1.0 - PruneConfig{}.q);
  CHECK(rep.delta == 10);
  CHECK(rep.corner_counts == std::vector<Index>{10, 20, 30});
  CHECK(rep.s0_fraction == 0.0);
  CHECK(rep.m == 1.0);
}

TEST_CASE("pruning diagnostic: sparse census grid point K=2, n=2000 gives m=1") {
  const std::int64_t n = 2000;
  const int K = 2;
  ModelParams params(n, K, Vector::Constant(K, 1.0 / K), offdiag_B(K, 1.0, 0.001),
                     std::log(static_cast<double>(n)) / static_cast<double>(n));
  SamplerConfig config{4};
  const auto theta = sample_theta(params, config);
  const auto graph = sample_adjacency(theta, params, config);
  const auto spectrum = top_k_eigs(graph, K);
  const auto population = population_spectrum(theta, params);
  const Matrix corners = corner_matrix(theta, population);

  const auto rep = pruning_diagnostic(spectrum.eigenvectors, theta, corners,
                                      PruneConfig{}, 0.0);
  CHECK(rep.m == doctest::Approx(1.0));
  CHECK(rep.s0_fraction > 0.0);
  CHECK(rep.s0_fraction < 0.2);
}
