#include "spacl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace spacl {

namespace detail {

std::vector<int> solve_assignment(const Matrix& cost) {
  // Shortest-augmenting-path assignment with potentials (e-maxx form),
  // 1-based internally.
  const int n = static_cast<int>(cost.rows());
  std::vector<double> u(static_cast<size_t>(n) + 1, 0.0), v(static_cast<size_t>(n) + 1, 0.0);
  std::vector<int> way(static_cast<size_t>(n) + 1, 0), matched(static_cast<size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    matched[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<size_t>(n) + 1, std::numeric_limits<double>::infinity());
    std::vector<bool> used(static_cast<size_t>(n) + 1, false);
    do {
      used[static_cast<size_t>(j0)] = true;
      const int i0 = matched[static_cast<size_t>(j0)];
      double delta = std::numeric_limits<double>::infinity();
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<size_t>(j)]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<size_t>(i0)] - v[static_cast<size_t>(j)];
        if (cur < minv[static_cast<size_t>(j)]) {
          minv[static_cast<size_t>(j)] = cur;
          way[static_cast<size_t>(j)] = j0;
        }
        if (minv[static_cast<size_t>(j)] < delta) {
          delta = minv[static_cast<size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<size_t>(j)]) {
          u[static_cast<size_t>(matched[static_cast<size_t>(j)])] += delta;
          v[static_cast<size_t>(j)] -= delta;
        } else {
          minv[static_cast<size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (matched[static_cast<size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<size_t>(j0)];
      matched[static_cast<size_t>(j0)] = matched[static_cast<size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(static_cast<size_t>(n), -1);
  for (int j = 1; j <= n; ++j)
    if (matched[static_cast<size_t>(j)] > 0)
      row_to_col[static_cast<size_t>(matched[static_cast<size_t>(j)]) - 1] = j - 1;
  return row_to_col;
}

namespace {

Vector average_ranks(const Vector& x) {
  const Index n = x.size();
  std::vector<Index> idx(static_cast<size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::sort(idx.begin(), idx.end(), [&x](Index a, Index b) { return x[a] < x[b]; });
  Vector ranks(n);
  Index i = 0;
  while (i < n) {
    Index j = i;
    while (j + 1 < n && x[idx[static_cast<size_t>(j + 1)]] == x[idx[static_cast<size_t>(i)]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (Index k = i; k <= j; ++k) ranks[idx[static_cast<size_t>(k)]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(const Vector& x, const Vector& y) {
  if (x.size() != y.size()) throw DimensionError("spearman: length mismatch");
  if (x.size() < 2) throw DimensionError("spearman: needs at least two samples");
  const Vector rx = average_ranks(x);
  const Vector ry = average_ranks(y);
  const Vector cx = rx.array() - rx.mean();
  const Vector cy = ry.array() - ry.mean();
  const double vx = cx.squaredNorm();
  const double vy = cy.squaredNorm();
  if (vx == 0.0 || vy == 0.0) return 0.0;  // constant column convention
  if (rx == ry) return 1.0;                // identical rankings, exactly
  return cx.dot(cy) / std::sqrt(vx * vy);
}

}  // namespace detail

namespace {

void check_same_shape(const Matrix& a, const Matrix& b, const char* who) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError(std::string(who) + ": shape mismatch");
}

double permutation_cost(const Matrix& cost, const std::vector<int>& perm) {
  double total = 0.0;
  for (size_t a = 0; a < perm.size(); ++a)
    total += cost(static_cast<Index>(a), perm[a]);
  return total;
}

}  // namespace

AlignmentResult align_columns(const Matrix& theta_hat, const Matrix& theta) {
  check_same_shape(theta_hat, theta, "align_columns");
  const int K = static_cast<int>(theta.cols());
  Matrix cost(K, K);
  for (int a = 0; a < K; ++a)
    for (int b = 0; b < K; ++b)
      cost(a, b) = (theta_hat.col(a) - theta.col(b)).squaredNorm();

  AlignmentResult result;
  if (K <= 8) {
    std::vector<int> perm(static_cast<size_t>(K));
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> best = perm;
    double best_cost = permutation_cost(cost, perm);
    while (std::next_permutation(perm.begin(), perm.end())) {
      const double c = permutation_cost(cost, perm);
      if (c < best_cost) {
        best_cost = c;
        best = perm;
      }
    }
    result.permutation = std::move(best);
    result.cost = best_cost;
  } else {
    result.permutation = detail::solve_assignment(cost);
    result.cost = permutation_cost(cost, result.permutation);
  }
  return result;
}

double relative_frobenius_error(const Matrix& theta_hat, const Matrix& theta) {
  check_same_shape(theta_hat, theta, "relative_frobenius_error");
  const double denom = theta.norm();
  if (denom == 0.0) throw ValueError("relative_frobenius_error: ||Theta||_F is zero");
  return std::sqrt(std::max(0.0, align_columns(theta_hat, theta).cost)) / denom;
}

RowwiseErrorReport max_rowwise_relative_error(const MembershipMatrix& theta_hat,
                                              const Matrix& theta) {
  check_same_shape(theta_hat.theta(), theta, "max_rowwise_relative_error");
  const auto align = align_columns(theta_hat.theta(), theta);
  Matrix aligned(theta.rows(), theta.cols());
  for (size_t a = 0; a < align.permutation.size(); ++a)
    aligned.col(static_cast<Index>(a)) = theta.col(align.permutation[a]);

  RowwiseErrorReport report;
  for (Index i = 0; i < theta.rows(); ++i) {
    if (theta_hat.is_zeroed(i)) {
      ++report.zeroed_rows;
      continue;
    }
    const double denom = aligned.row(i).norm();
    if (denom == 0.0)
      throw ValueError("max_rowwise_relative_error: ground-truth row has zero norm");
    report.max_relative_error =
        std::max(report.max_relative_error,
                 (theta_hat.theta().row(i) - aligned.row(i)).norm() / denom);
  }
  return report;
}

double rc_avg(const Matrix& theta_hat, const Matrix& theta) {
  check_same_shape(theta_hat, theta, "rc_avg");
  if (theta.rows() < 2) throw DimensionError("rc_avg: needs n >= 2");
  const int K = static_cast<int>(theta.cols());
  Matrix rc(K, K);
  for (int a = 0; a < K; ++a)
    for (int b = 0; b < K; ++b)
      rc(a, b) = detail::spearman(theta_hat.col(a), theta.col(b));
  // Maximize total RC; reuse the min-cost solver on the negated matrix.
  const auto perm = detail::solve_assignment(-rc);
  double total = 0.0;
  for (size_t a = 0; a < perm.size(); ++a) total += rc(static_cast<Index>(a), perm[a]);
  return total / static_cast<double>(K);
}

DeviationReport eigen_deviation_report(const Spectrum& a_spectrum,
                                       const Spectrum& p_spectrum,
                                       const MembershipMatrix& theta,
                                       const ModelParams& params) {
  const Matrix& vh = a_spectrum.eigenvectors;
  const Matrix& vp = p_spectrum.eigenvectors;
  if (vh.cols() != vp.cols() || vh.rows() != vp.rows())
    throw DimensionError("eigen_deviation_report: spectra shapes differ");
  if (vh.rows() != theta.n() || theta.n() != params.n())
    throw DimensionError("eigen_deviation_report: node count mismatch");
  const Index n = vh.rows();

  DeviationReport report;
  report.delocalization_min = std::numeric_limits<double>::infinity();
  Vector row_hat(n), row_pop(n);
  for (Index i = 0; i < n; ++i) {
    // Row i of (VhVh' - VV') without forming either projector.
    row_hat.noalias() = vh * vh.row(i).transpose();
    row_pop.noalias() = vp * vp.row(i).transpose();
    const double dev = (row_hat - row_pop).norm();
    const double pop_norm = vp.row(i).norm();
    report.max_row_deviation = std::max(report.max_row_deviation, dev);
    if (pop_norm > 0.0)
      report.max_relative_row_deviation =
          std::max(report.max_relative_row_deviation, dev / pop_norm);
    const double sq = pop_norm * pop_norm;
    report.delocalization_max = std::max(report.delocalization_max, sq);
    report.delocalization_min = std::min(report.delocalization_min, sq);
  }
  const double nn = static_cast<double>(params.n());
  report.delocalization_upper_ok =
      report.delocalization_max <= 2.0 * params.nu() * (1.0 + params.alpha0()) / nn;
  report.delocalization_lower_ok = report.delocalization_min >= 2.0 / (3.0 * nn);
  return report;
}

}  // namespace spacl
