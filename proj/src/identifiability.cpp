#include "spacl/identifiability.hpp"

#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace spacl {

namespace {

constexpr double kPureTol = 1e-9;
constexpr double kAffineTol = 1e-9;

bool has_pure_node_per_community(const Matrix& theta) {
  const int K = static_cast<int>(theta.cols());
  std::vector<bool> seen(static_cast<size_t>(K), false);
  for (Index i = 0; i < theta.rows(); ++i)
    for (int j = 0; j < K; ++j)
      if (theta(i, j) >= 1.0 - kPureTol) seen[static_cast<size_t>(j)] = true;
  return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

/// The most interior fully-mixed row, or -1 if none has all entries > 0.
Index find_mixed_node(const Matrix& theta) {
  Index best = -1;
  double best_margin = 0.0;
  for (Index i = 0; i < theta.rows(); ++i) {
    const double margin = theta.row(i).minCoeff();
    if (margin > best_margin) {
      best_margin = margin;
      best = i;
    }
  }
  return best;
}

}  // namespace

namespace detail {

RankSplit rank_split(const Matrix& B) {
  const int K = static_cast<int>(B.rows());
  Eigen::JacobiSVD<Matrix> svd(B);
  const double smax = svd.singularValues()(0);
  const double thresh = kRankRelTol * (smax > 0.0 ? smax : 1.0);
  const int rank = static_cast<int>((svd.singularValues().array() > thresh).count());

  RankSplit split;
  split.rank = rank;

  // Pivoted QR on B^T picks independent rows of B (pivot order kept); for
  // symmetric B the matching principal submatrix is then nonsingular.
  Eigen::ColPivHouseholderQR<Matrix> qr(B.transpose());
  const auto& perm = qr.colsPermutation().indices();
  std::vector<bool> leading(static_cast<size_t>(K), false);
  for (int j = 0; j < rank; ++j) {
    split.order.push_back(perm(j));
    leading[static_cast<size_t>(perm(j))] = true;
  }
  for (Index j = 0; j < K; ++j)
    if (!leading[static_cast<size_t>(j)]) split.order.push_back(j);

  Matrix bp(K, K);
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j)
      bp(i, j) = B(split.order[static_cast<size_t>(i)], split.order[static_cast<size_t>(j)]);

  split.C = bp.topLeftCorner(rank, rank);
  if (rank < K)
    split.W = Eigen::FullPivLU<Matrix>(split.C).solve(bp.topRightCorner(rank, K - rank));
  else
    split.W = Matrix(rank, 0);
  return split;
}

Vector mixed_witness_direction(const Matrix& B) {
  const int K = static_cast<int>(B.rows());
  const auto split = rank_split(B);
  const int r = split.rank;
  const int ell = K - r;
  if (ell == 0) throw ValueError("construct_mixed_witness: B has full rank");
  if (ell == 1 && std::abs(split.W.col(0).sum() - 1.0) > kAffineTol)
    throw ValueError("construct_mixed_witness: rank K-1 without an affine row");

  // beta != 0 with beta^T (1_ell - W^T 1_r) = 0; free when the affine sums
  // are all 1, otherwise any unit vector in the orthogonal complement.
  Vector c = Vector::Ones(ell) - split.W.transpose() * Vector::Ones(r);
  Vector beta(ell);
  if (c.norm() <= kAffineTol) {
    beta.setZero();
    beta[0] = 1.0;
  } else {
    if (ell == 1)
      throw ValueError("construct_mixed_witness: no valid beta for ell = 1");
    Index small = 0;
    c.cwiseAbs().minCoeff(&small);
    beta.setZero();
    beta[small] = 1.0;
    beta -= (c[small] / c.squaredNorm()) * c;
    beta.normalize();
  }

  // beta^T [-W^T | I_ell], mapped back to the original community order.
  Vector direction_perm(K);
  direction_perm.head(r) = -(split.W * beta);
  direction_perm.tail(ell) = beta;
  Vector direction(K);
  for (int j = 0; j < K; ++j)
    direction[split.order[static_cast<size_t>(j)]] = direction_perm[j];
  return direction;
}

}  // namespace detail

IdentifiabilityVerdict check_identifiability(const MembershipMatrix& theta,
                                             const Matrix& B, double rho) {
  const int K = theta.K();
  if (B.rows() != K || B.cols() != K)
    throw DimensionError("check_identifiability: B must be K x K");

  IdentifiabilityVerdict verdict;
  if (!has_pure_node_per_community(theta.theta())) {
    verdict.status = IdentifiabilityStatus::kUndetermined;
    verdict.reason = "pure-node-missing";
    return verdict;
  }

  const auto split = detail::rank_split(B);
  if (split.rank == K) {
    verdict.status = IdentifiabilityStatus::kIdentifiable;
    verdict.reason = "full-rank";
    return verdict;
  }

  if (split.rank == K - 1) {
    const double wsum = split.W.col(0).sum();
    if (std::abs(wsum - 1.0) > kAffineTol) {
      verdict.status = IdentifiabilityStatus::kIdentifiable;
      verdict.reason = "no-affine-row";
      return verdict;
    }
  }

  // Remaining cases: rank K-1 with an affine row, or rank < K-1.
  const Index mixed = find_mixed_node(theta.theta());
  if (mixed < 0) {
    verdict.status = IdentifiabilityStatus::kUndetermined;
    verdict.reason = "clause-gap";
    return verdict;
  }

  // Half the largest epsilon keeping the perturbed row in the open simplex.
  const Vector direction = detail::mixed_witness_direction(B);
  const Vector row = theta.theta().row(mixed).transpose();
  double eps_max = std::numeric_limits<double>::infinity();
  for (int j = 0; j < K; ++j) {
    if (direction[j] > 0.0)
      eps_max = std::min(eps_max, (1.0 - row[j]) / direction[j]);
    else if (direction[j] < 0.0)
      eps_max = std::min(eps_max, row[j] / -direction[j]);
  }
  verdict.status = IdentifiabilityStatus::kNotIdentifiable;
  verdict.reason = "affine-row-mixed-node";
  verdict.witness = construct_mixed_witness(theta, B, rho, 0.5 * eps_max);
  return verdict;
}

std::pair<Matrix, Matrix> construct_mixed_witness(const MembershipMatrix& theta,
                                                  const Matrix& B, double rho,
                                                  double epsilon) {
  (void)rho;  // the construction preserves Theta B Theta^T for any density scale
  const int K = theta.K();
  if (B.rows() != K || B.cols() != K)
    throw DimensionError("construct_mixed_witness: B must be K x K");
  if (epsilon < 0.0) throw ValueError("construct_mixed_witness: epsilon must be >= 0");

  const Index mixed = find_mixed_node(theta.theta());
  if (mixed < 0) throw ValueError("construct_mixed_witness: no fully mixed node");

  const Vector direction = detail::mixed_witness_direction(B);

  Matrix theta_prime = theta.theta();
  Vector row = theta_prime.row(mixed).transpose() + epsilon * direction;
  if (epsilon > 0.0 && (row.minCoeff() <= 0.0 || row.maxCoeff() >= 1.0))
    throw ValueError("construct_mixed_witness: epsilon too large for the open simplex");
  theta_prime.row(mixed) = row.transpose();
  return {std::move(theta_prime), B};
}

std::pair<Matrix, Matrix> construct_no_pure_witness(const MembershipMatrix& theta,
                                                    const Matrix& B, double rho,
                                                    double epsilon) {
  const int K = theta.K();
  if (K < 2) throw ValueError("construct_no_pure_witness: needs K >= 2");
  if (B.rows() != K || B.cols() != K)
    throw DimensionError("construct_no_pure_witness: B must be K x K");

  const Matrix rhoB = rho * B;
  if (rhoB.minCoeff() <= 0.0 || rhoB.maxCoeff() >= 1.0)
    throw ValueError("construct_no_pure_witness: rho * B must lie strictly in (0, 1)");

  const double max_first = theta.theta().col(0).maxCoeff();
  const double delta = 1.0 - max_first;
  if (delta <= 0.0)
    throw ValueError("construct_no_pure_witness: community 1 has a pure node");
  if (!(epsilon > 0.0) || epsilon >= delta)
    throw ValueError("construct_no_pure_witness: epsilon must lie in (0, delta)");

  Matrix m = Matrix::Zero(K, K);
  m(0, 0) = 1.0 + (K - 1) * epsilon * epsilon;
  for (int j = 1; j < K; ++j) m(0, j) = -epsilon * epsilon;
  for (int i = 1; i < K; ++i)
    for (int j = 1; j < K; ++j)
      m(i, j) = epsilon + (i == j ? 1.0 - (K - 1) * epsilon : 0.0);

  Matrix theta2 = theta.theta() * m;
  if (theta2.minCoeff() < 0.0)
    throw ValueError("construct_no_pure_witness: negative membership entry");

  Eigen::PartialPivLU<Matrix> lu(m);
  Matrix b2 = lu.solve(rhoB);                       // M^{-1} (rho B)
  b2 = lu.solve(b2.transpose()).transpose();        // ... M^{-T}
  b2 = ((b2 + b2.transpose()) * 0.5).eval();
  if (b2.minCoeff() <= 0.0 || b2.maxCoeff() >= 1.0)
    throw ValueError("construct_no_pure_witness: B2 escaped (0, 1); shrink epsilon");

  return {std::move(theta2), std::move(b2)};
}

std::pair<Matrix, Matrix> construct_no_pure_witness_auto(const MembershipMatrix& theta,
                                                         const Matrix& B, double rho) {
  const double delta = 1.0 - theta.theta().col(0).maxCoeff();
  if (delta <= 0.0)
    throw ValueError("construct_no_pure_witness: community 1 has a pure node");
  double eps = delta / 2.0;
  for (int attempt = 0; attempt < 50; ++attempt) {
    try {
      return construct_no_pure_witness(theta, B, rho, eps);
    } catch (const ValueError&) {
      eps /= 2.0;
    }
  }
  return construct_no_pure_witness(theta, B, rho, eps);
}

}  // namespace spacl
