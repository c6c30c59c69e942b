#include "spacl/model.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace spacl {

ModelParams::ModelParams(std::int64_t n, int K, Vector alpha, Matrix B, double rho)
    : n_(n), K_(K), alpha_(std::move(alpha)), B_(std::move(B)), rho_(rho) {
  if (n_ <= 0) throw ValueError("ModelParams: n must be positive");
  if (K_ < 1) throw ValueError("ModelParams: K must be >= 1");
  if (alpha_.size() != K_) throw DimensionError("ModelParams: alpha must have length K");
  if ((alpha_.array() <= 0.0).any()) throw ValueError("ModelParams: alpha must be strictly positive");
  if (B_.rows() != K_ || B_.cols() != K_) throw DimensionError("ModelParams: B must be K x K");
  if ((B_ - B_.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol)
    throw ValueError("ModelParams: B must be symmetric");
  if (B_.minCoeff() < 0.0) throw ValueError("ModelParams: B entries must be nonnegative");

  const double bmax = B_.maxCoeff();
  if (bmax <= 0.0) throw ValueError("ModelParams: B must have a positive entry");
  if (std::abs(bmax - 1.0) > kRowSumTol) {
    // Joint rescale keeps rho*B fixed and restores max B = 1.
    B_ /= bmax;
    rho_ *= bmax;
  }
  if (!(rho_ > 0.0) || rho_ > 1.0)
    throw ValueError("ModelParams: rho (after B normalization) must lie in (0, 1]");

  alpha0_ = alpha_.sum();
  alpha_min_ = alpha_.minCoeff();
  alpha_max_ = alpha_.maxCoeff();
}

MembershipMatrix::MembershipMatrix(Matrix theta, std::vector<Index> pure_rows,
                                   std::vector<std::uint8_t> zeroed, Validation validation)
    : theta_(std::move(theta)), pure_rows_(std::move(pure_rows)), zeroed_(std::move(zeroed)) {
  if (theta_.size() == 0) throw DimensionError("MembershipMatrix: empty matrix");
  if (!zeroed_.empty() && static_cast<Index>(zeroed_.size()) != theta_.rows())
    throw DimensionError("MembershipMatrix: zeroed flag size mismatch");
  if (!theta_.allFinite()) throw ValueError("MembershipMatrix: non-finite entry");
  if (theta_.minCoeff() < 0.0) throw ValueError("MembershipMatrix: negative entry");
  for (Index i = 0; i < theta_.rows(); ++i) {
    const double s = theta_.row(i).sum();
    if (is_zeroed(i)) {
      if (s != 0.0) throw ValueError("MembershipMatrix: zeroed row has mass");
    } else if (validation == Validation::kStrict && std::abs(s - 1.0) > kRowSumTol) {
      throw ValueError("MembershipMatrix: row " + std::to_string(i) +
                       " sums to " + std::to_string(s));
    }
  }
  for (Index r : pure_rows_) {
    if (r < 0 || r >= theta_.rows()) throw ValueError("MembershipMatrix: pure row out of range");
    Index nonzero = 0;
    for (Index j = 0; j < theta_.cols(); ++j) {
      if (theta_(r, j) != 0.0) {
        ++nonzero;
        if (theta_(r, j) != 1.0) throw ValueError("MembershipMatrix: pure row entry != 1");
      }
    }
    if (nonzero != 1) throw ValueError("MembershipMatrix: pure row not a basis vector");
  }
}

Index MembershipMatrix::zeroed_count() const {
  Index c = 0;
  for (auto f : zeroed_) c += (f != 0);
  return c;
}

SparseSymmetricGraph SparseSymmetricGraph::from_edges(
    std::int64_t n, std::vector<std::pair<std::int32_t, std::int32_t>> edges) {
  SparseSymmetricGraph g;
  g.n_ = n;
  std::int64_t self_loops = 0;
  for (auto& [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n || v >= n)
      throw ValueError("SparseSymmetricGraph: endpoint out of range");
    if (u == v) ++self_loops;
    if (u > v) std::swap(u, v);
  }
  std::erase_if(edges, [](const auto& e) { return e.first == e.second; });
  std::sort(edges.begin(), edges.end());
  const auto last = std::unique(edges.begin(), edges.end());
  g.duplicates_merged_ = static_cast<std::int64_t>(edges.end() - last);
  edges.erase(last, edges.end());
  g.self_loops_dropped_ = self_loops;

  std::vector<std::int64_t> deg(static_cast<size_t>(n), 0);
  for (const auto& [u, v] : edges) {
    ++deg[static_cast<size_t>(u)];
    ++deg[static_cast<size_t>(v)];
  }
  g.offsets_.assign(static_cast<size_t>(n) + 1, 0);
  for (std::int64_t i = 0; i < n; ++i)
    g.offsets_[static_cast<size_t>(i) + 1] = g.offsets_[static_cast<size_t>(i)] + deg[static_cast<size_t>(i)];
  g.adj_.resize(static_cast<size_t>(g.offsets_.back()));
  std::vector<std::int64_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  for (const auto& [u, v] : edges) {
    g.adj_[static_cast<size_t>(cursor[static_cast<size_t>(u)]++)] = v;
    g.adj_[static_cast<size_t>(cursor[static_cast<size_t>(v)]++)] = u;
  }
  // Neighbor lists are sorted because the edge list was.
  return g;
}

void SparseSymmetricGraph::multiply(const Vector& x, Vector& y) const {
  if (x.size() != n_) throw DimensionError("SparseSymmetricGraph::multiply: size mismatch");
  y.setZero(n_);
  for (std::int64_t i = 0; i < n_; ++i) {
    double acc = 0.0;
    for (std::int64_t p = offsets_[static_cast<size_t>(i)]; p < offsets_[static_cast<size_t>(i) + 1]; ++p)
      acc += x[adj_[static_cast<size_t>(p)]];
    y[i] = acc;
  }
}

Matrix SparseSymmetricGraph::densify() const {
  Matrix m = Matrix::Zero(n_, n_);
  for (std::int64_t i = 0; i < n_; ++i)
    for (auto j : neighbors(i)) m(i, j) = 1.0;
  return m;
}

std::vector<std::pair<std::int32_t, std::int32_t>> SparseSymmetricGraph::edge_list() const {
  std::vector<std::pair<std::int32_t, std::int32_t>> out;
  out.reserve(static_cast<size_t>(num_edges()));
  for (std::int64_t i = 0; i < n_; ++i)
    for (auto j : neighbors(i))
      if (i < j) out.emplace_back(static_cast<std::int32_t>(i), j);
  return out;
}

DenseSymmetricMatrix::DenseSymmetricMatrix(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw DimensionError("DenseSymmetricMatrix: not square");
  if ((m_ - m_.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol)
    throw ValueError("DenseSymmetricMatrix: symmetry violated beyond 1e-12");
}

double lambda_star(const Matrix& B) {
  Eigen::JacobiSVD<Matrix> svd(B);
  return svd.singularValues().tail(1)(0);
}

AssumptionReport validate_assumptions(const ModelParams& params, double xi) {
  AssumptionReport rep;
  rep.xi = xi;
  rep.convention =
      "order constants = 1; hidden log factors = (log n)^xi; rank via "
      "singular values > 1e-10 * ||B||";

  const double n = static_cast<double>(params.n());
  const double K = params.K();
  const double a0 = params.alpha0();
  const double nu = params.nu();
  const double rho = params.rho();
  const double logn = std::log(n);

  Eigen::JacobiSVD<Matrix> svd(params.B());
  const Vector& sv = svd.singularValues();
  const double lstar = sv.tail(1)(0);

  rep.a1_nu_lhs = nu;
  rep.a1_nu_rhs = std::min(std::sqrt(n / (27.0 * logn)), n * rho) / (2.0 * (1.0 + a0));
  rep.a1_nu_ok = rep.a1_nu_lhs <= rep.a1_nu_rhs;

  rep.a1_sep_lhs = lstar / nu;
  rep.a1_sep_rhs = 8.0 * (1.0 + a0) * std::pow(logn, xi) / std::sqrt(n * rho);
  rep.a1_sep_ok = rep.a1_sep_lhs >= rep.a1_sep_rhs;

  const double thresh = kRankRelTol * sv(0);
  rep.a2_rank = static_cast<int>((sv.array() > thresh).count());
  rep.a2_min_singular = lstar;
  rep.a2_ok = rep.a2_rank == params.K();

  rep.a3_lhs = lstar;
  rep.a3_rhs = std::pow(K, 3.0) * std::pow(nu, 2.5) * std::pow(1.0 + a0, 1.5) *
               std::pow(logn, xi) / std::sqrt(n * rho);
  rep.a3_ok = rep.a3_lhs >= rep.a3_rhs;

  return rep;
}

}  // namespace spacl
