#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "spacl/metrics.hpp"
#include "spacl/sampling.hpp"
#include "spacl/spectral.hpp"

using namespace spacl;

namespace {

Matrix offdiag_B(int K, double diag, double off) {
  Matrix b = Matrix::Constant(K, K, off);
  b.diagonal().setConstant(diag);
  return b;
}

double brute_force_best_cost(const Matrix& theta_hat, const Matrix& theta) {
  const int K = static_cast<int>(theta.cols());
  std::vector<int> perm(static_cast<size_t>(K));
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (int a = 0; a < K; ++a)
      cost += (theta_hat.col(a) - theta.col(perm[static_cast<size_t>(a)])).squaredNorm();
    best = std::min(best, cost);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

Matrix random_theta(Index n, int K, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix t(n, K);
  for (Index i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int j = 0; j < K; ++j) {
      t(i, j) = -std::log(1.0 - unif(eng));
      sum += t(i, j);
    }
    t.row(i) /= sum;
  }
  return t;
}

}  // namespace

TEST_CASE("alignment: identity and swapped columns") {
  const Matrix t = random_theta(30, 3, 1);
  auto r = align_columns(t, t);
  CHECK(r.permutation == std::vector<int>{0, 1, 2});
  CHECK(r.cost == doctest::Approx(0.0));

  Matrix swapped = t;
  swapped.col(0).swap(swapped.col(1));
  r = align_columns(swapped, t);
  CHECK(r.permutation == std::vector<int>{1, 0, 2});
  CHECK(r.cost <= 1e-24);
}

TEST_CASE("alignment matches brute force for K up to 8") {
  for (int K : {2, 3, 5, 8}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const Matrix a = random_theta(25, K, seed);
      const Matrix b = random_theta(25, K, seed + 100);
      const auto r = align_columns(a, b);
      CHECK(r.cost == doctest::Approx(brute_force_best_cost(a, b)).epsilon(1e-12));
    }
  }
}

TEST_CASE("assignment path (K > 8) equals exhaustive search") {
  const int K = 9;
  const Matrix a = random_theta(20, K, 3);
  const Matrix b = random_theta(20, K, 4);
  const auto r = align_columns(a, b);
  CHECK(r.cost == doctest::Approx(brute_force_best_cost(a, b)).epsilon(1e-12));
}

TEST_CASE("relative frobenius error: fixed points and hand computation") {
  const Matrix t = random_theta(40, 3, 5);
  CHECK(relative_frobenius_error(t, t) == doctest::Approx(0.0));
  CHECK(relative_frobenius_error(Matrix::Zero(40, 3), t) == doctest::Approx(1.0));

  // 2x2 case small enough to evaluate with scalar arithmetic.
  Matrix truth(2, 2), est(2, 2);
  truth << 1.0, 0.0, 0.25, 0.75;
  est << 0.9, 0.1, 0.3, 0.7;
  const double id_cost = std::pow(0.1, 2) * 2 + std::pow(0.05, 2) * 2;
  const double swap_cost = (std::pow(0.9, 2) + std::pow(1.0 - 0.1, 2)) +
                           (std::pow(0.3 - 0.75, 2) + std::pow(0.7 - 0.25, 2));
  const double expected = std::sqrt(std::min(id_cost, swap_cost)) / truth.norm();
  CHECK(relative_frobenius_error(est, truth) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("relative frobenius error is invariant to simultaneous permutation") {
  const Matrix a = random_theta(30, 4, 6);
  const Matrix b = random_theta(30, 4, 7);
  Matrix ap = a, bp = b;
  const std::vector<int> perm = {2, 0, 3, 1};
  for (int j = 0; j < 4; ++j) {
    ap.col(j) = a.col(perm[static_cast<size_t>(j)]);
    bp.col(j) = b.col(perm[static_cast<size_t>(j)]);
  }
  CHECK(relative_frobenius_error(a, b) == relative_frobenius_error(ap, bp));
}

TEST_CASE("row-wise relative error: single wrong row and zeroed exclusion") {
  Matrix t = random_theta(20, 3, 8);
  Matrix est = t;
  Vector other(3);
  other << 0.1, 0.2, 0.7;
  est.row(4) = other.transpose();
  const double expected = (est.row(4) - t.row(4)).norm() / t.row(4).norm();

  CHECK(max_rowwise_relative_error(MembershipMatrix(t), t).max_relative_error ==
        doctest::Approx(0.0));
  const auto rep = max_rowwise_relative_error(MembershipMatrix(est), t);
  CHECK(rep.max_relative_error == doctest::Approx(expected).epsilon(1e-12));
  CHECK(rep.zeroed_rows == 0);

  // A zeroed row is excluded from the max and counted instead.
  Matrix with_zero = est;
  with_zero.row(9).setZero();
  std::vector<std::uint8_t> flags(20, 0);
  flags[9] = 1;
  const auto rep2 = max_rowwise_relative_error(MembershipMatrix(with_zero, {}, flags), t);
  CHECK(rep2.zeroed_rows == 1);
  CHECK(rep2.max_relative_error == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("rc_avg: identity, reversal, and tie conventions") {
  const Matrix t = random_theta(50, 3, 9);
  CHECK(rc_avg(t, t) == doctest::Approx(1.0));

  // Tie-free columns sharing one rank order; reversing rows flips every
  // pairwise rank correlation to -1 regardless of the matching.
  const Index n = 30;
  Matrix inc(n, 3);
  for (Index i = 0; i < n; ++i)
    for (int j = 0; j < 3; ++j) inc(i, j) = static_cast<double>(i + 1) * (j + 1);
  Matrix dec = inc.colwise().reverse();
  CHECK(rc_avg(dec, inc) == doctest::Approx(-1.0));

  // A constant column contributes zero.
  Matrix flat = inc;
  flat.col(2).setConstant(5.0);
  const double rc = rc_avg(flat, inc);
  CHECK(rc == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("rc_avg: binary truth against soft estimate matches a direct oracle") {
  // Hand-built 6-node, K=2 case; ranks computed here with average ties.
  Matrix truth(6, 2);
  truth << 1, 0, 1, 0, 1, 0, 0, 1, 0, 1, 0, 1;
  Matrix est(6, 2);
  est << 0.9, 0.1, 0.8, 0.2, 0.6, 0.4, 0.3, 0.7, 0.2, 0.8, 0.1, 0.9;

  auto spearman_oracle = [](std::vector<double> x, std::vector<double> y) {
    const size_t n = x.size();
    auto ranks = [](std::vector<double> v) {
      std::vector<double> r(v.size());
      for (size_t i = 0; i < v.size(); ++i) {
        double less = 0, equal = 0;
        for (double u : v) {
          if (u < v[i]) ++less;
          if (u == v[i]) ++equal;
        }
        r[i] = less + (equal + 1.0) / 2.0;
      }
      return r;
    };
    const auto rx = ranks(x), ry = ranks(y);
    double mx = 0, my = 0;
    for (size_t i = 0; i < n; ++i) {
      mx += rx[i];
      my += ry[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double num = 0, vx = 0, vy = 0;
    for (size_t i = 0; i < n; ++i) {
      num += (rx[i] - mx) * (ry[i] - my);
      vx += (rx[i] - mx) * (rx[i] - mx);
      vy += (ry[i] - my) * (ry[i] - my);
    }
    return num / std::sqrt(vx * vy);
  };

  double best = -2.0;
  for (const auto& perm : {std::vector<int>{0, 1}, std::vector<int>{1, 0}}) {
    double total = 0.0;
    for (int a = 0; a < 2; ++a) {
      std::vector<double> x(6), y(6);
      for (int i = 0; i < 6; ++i) {
        x[static_cast<size_t>(i)] = est(i, a);
        y[static_cast<size_t>(i)] = truth(i, perm[static_cast<size_t>(a)]);
      }
      total += spearman_oracle(x, y);
    }
    best = std::max(best, total / 2.0);
  }
  CHECK(rc_avg(est, truth) == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("rc_avg is invariant to strictly monotone transforms") {
  const Matrix t = random_theta(40, 3, 10);
  Matrix cubed = t.array().pow(3.0).matrix();
  CHECK(rc_avg(cubed, t) == doctest::Approx(rc_avg(t, t)));
}

TEST_CASE("deviation report: identical matrices and lazy-vs-explicit oracle") {
  ModelParams params(150, 3, Vector::Constant(3, 0.4), offdiag_B(3, 1.0, 0.1), 0.3);
  const auto theta = sample_theta(params, SamplerConfig{23});
  const auto p = build_population_matrix(theta, params);
  const auto population = population_spectrum(theta, params);
  const auto dense = top_k_eigs(p, 3);

  // Same matrix on both sides: deviation at round-off scale.
  const auto self_rep = eigen_deviation_report(dense, population, theta, params);
  CHECK(self_rep.max_row_deviation <= 1e-8);

  // Against a sampled adjacency, the lazy rows must equal the explicit
  // n x n projector difference.
  const auto graph = sample_adjacency(theta, params, SamplerConfig{23});
  const auto empirical = top_k_eigs(graph, 3);
  const auto rep = eigen_deviation_report(empirical, population, theta, params);

  const Matrix diff =
      empirical.eigenvectors * empirical.eigenvectors.transpose() -
      population.eigenvectors * population.eigenvectors.transpose();
  double explicit_max = 0.0, explicit_rel = 0.0;
  for (Index i = 0; i < diff.rows(); ++i) {
    const double dev = diff.row(i).norm();
    explicit_max = std::max(explicit_max, dev);
    explicit_rel = std::max(explicit_rel, dev / population.eigenvectors.row(i).norm());
  }
  CHECK(std::abs(rep.max_row_deviation - explicit_max) <= 1e-10);
  CHECK(std::abs(rep.max_relative_row_deviation - explicit_rel) <= 1e-10);
}

TEST_CASE("deviation report: delocalization bounds hold on sampled draws") {
  ModelParams params(500, 3, Vector::Constant(3, 1.0 / 3.0), offdiag_B(3, 1.0, 0.1), 0.2);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto theta = sample_theta(params, SamplerConfig{seed});
    const auto population = population_spectrum(theta, params);
    const auto rep = eigen_deviation_report(population, population, theta, params);
    CHECK(rep.delocalization_upper_ok);
    CHECK(rep.delocalization_lower_ok);
  }
}
