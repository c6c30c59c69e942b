#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spacl/types.hpp"

namespace spacl {

/// MMSB instance parameters (n, K, alpha, B, rho) with the identifiability
/// normalization max_ij B_ij = 1. A constructor input with max B != 1 is
/// rescaled jointly with rho so that rho*B is preserved elementwise.
class ModelParams {
 public:
  ModelParams(std::int64_t n, int K, Vector alpha, Matrix B, double rho);

  std::int64_t n() const { return n_; }
  int K() const { return K_; }
  const Vector& alpha() const { return alpha_; }
  const Matrix& B() const { return B_; }
  double rho() const { return rho_; }

  double alpha0() const { return alpha0_; }
  double alpha_min() const { return alpha_min_; }
  double alpha_max() const { return alpha_max_; }
  double nu() const { return alpha0_ / alpha_min_; }

 private:
  std::int64_t n_;
  int K_;
  Vector alpha_;
  Matrix B_;
  double rho_;
  double alpha0_;
  double alpha_min_;
  double alpha_max_;
};

/// n x K nonnegative membership matrix. Rows sum to 1 within 1e-12 except
/// rows flagged zeroed (produced by estimation thresholding), which are
/// exactly zero. pure_rows lists rows that are standard basis vectors.
class MembershipMatrix {
 public:
  /// kRelaxed skips the row-sum check (file ingestion of binary/overlap
  /// ground truth); entries must still be nonnegative and finite.
  enum class Validation { kStrict, kRelaxed };

  explicit MembershipMatrix(Matrix theta, std::vector<Index> pure_rows = {},
                            std::vector<std::uint8_t> zeroed = {},
                            Validation validation = Validation::kStrict);

  const Matrix& theta() const { return theta_; }
  Index n() const { return theta_.rows(); }
  int K() const { return static_cast<int>(theta_.cols()); }

  const std::vector<Index>& pure_rows() const { return pure_rows_; }
  bool is_zeroed(Index i) const { return !zeroed_.empty() && zeroed_[static_cast<size_t>(i)] != 0; }
  const std::vector<std::uint8_t>& zeroed_flags() const { return zeroed_; }
  Index zeroed_count() const;

 private:
  Matrix theta_;
  std::vector<Index> pure_rows_;
  std::vector<std::uint8_t> zeroed_;  // empty means no zeroed rows
};

/// Undirected simple graph stored as symmetric CSR. No self-loops, edges
/// deduplicated, endpoints in [0, n).
class SparseSymmetricGraph {
 public:
  SparseSymmetricGraph() : n_(0) {}

  /// Builds from unordered pairs; duplicates (in either orientation) are
  /// merged and self-loops dropped. Counts are retrievable afterwards.
  static SparseSymmetricGraph from_edges(
      std::int64_t n, std::vector<std::pair<std::int32_t, std::int32_t>> edges);

  std::int64_t n() const { return n_; }
  std::int64_t num_edges() const { return static_cast<std::int64_t>(adj_.size()) / 2; }
  std::int64_t degree(std::int64_t i) const {
    return offsets_[static_cast<size_t>(i) + 1] - offsets_[static_cast<size_t>(i)];
  }
  std::span<const std::int32_t> neighbors(std::int64_t i) const {
    return {adj_.data() + offsets_[static_cast<size_t>(i)],
            adj_.data() + offsets_[static_cast<size_t>(i) + 1]};
  }
  std::int64_t self_loops_dropped() const { return self_loops_dropped_; }
  std::int64_t duplicates_merged() const { return duplicates_merged_; }

  /// y = A x
  void multiply(const Vector& x, Vector& y) const;

  Matrix densify() const;

  /// Sorted unique (u, v) pairs with u < v.
  std::vector<std::pair<std::int32_t, std::int32_t>> edge_list() const;

 private:
  std::int64_t n_;
  std::vector<std::int64_t> offsets_;
  std::vector<std::int32_t> adj_;
  std::int64_t self_loops_dropped_ = 0;
  std::int64_t duplicates_merged_ = 0;
};

/// Dense symmetric matrix; symmetry enforced within 1e-12 at construction.
class DenseSymmetricMatrix {
 public:
  explicit DenseSymmetricMatrix(Matrix m);

  Index n() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  void multiply(const Vector& x, Vector& y) const { y.noalias() = m_ * x; }

 private:
  Matrix m_;
};

/// Report for the model feasibility assumptions. Both sides of each
/// inequality are exposed; nothing throws on violation. Order-notation
/// constants are taken as 1 and hidden log factors as (log n)^xi.
struct AssumptionReport {
  // Assumption 1, clause 1: nu <= min(sqrt(n / (27 log n)), n rho) / (2 (1 + alpha0))
  double a1_nu_lhs = 0.0;
  double a1_nu_rhs = 0.0;
  bool a1_nu_ok = false;
  // Assumption 1, clause 2: lambda*(B) / nu >= 8 (1 + alpha0) (log n)^xi / sqrt(n rho)
  double a1_sep_lhs = 0.0;
  double a1_sep_rhs = 0.0;
  bool a1_sep_ok = false;
  // Assumption 2: rank(B) = K via smallest singular value > 1e-10 * ||B||
  int a2_rank = 0;
  double a2_min_singular = 0.0;
  bool a2_ok = false;
  // Assumption 3: lambda*(B) >= K^3 nu^2.5 (1 + alpha0)^1.5 (log n)^xi / sqrt(n rho)
  double a3_lhs = 0.0;
  double a3_rhs = 0.0;
  bool a3_ok = false;

  double xi = 0.0;
  std::string convention;
};

AssumptionReport validate_assumptions(const ModelParams& params, double xi = 1.5);

/// Smallest singular value of B (the K-th largest, K = dim).
double lambda_star(const Matrix& B);

}  // namespace spacl
