#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spacl/model.hpp"

namespace spacl {

enum class IdentifiabilityStatus { kIdentifiable, kNotIdentifiable, kUndetermined };

struct IdentifiabilityVerdict {
  IdentifiabilityStatus status = IdentifiabilityStatus::kUndetermined;
  std::string reason;  // which clause fired: full-rank, no-affine-row,
                       // affine-row-mixed-node, pure-node-missing, clause-gap
  std::optional<std::pair<Matrix, Matrix>> witness;  // (Theta', B') when not identifiable
};

/// Rank-based identifiability test: full rank is sufficient,
/// rank K-1 without an affine row combination is sufficient, and otherwise a
/// mixed node yields a constructive non-identifiability witness.
IdentifiabilityVerdict check_identifiability(const MembershipMatrix& theta,
                                             const Matrix& B, double rho);

/// Rank-deficient construction: perturbs one fully-mixed row m along a
/// direction in the null space of the corner geometry, leaving Theta B Theta^T
/// unchanged. Returns (Theta', B) with only row m altered.
std::pair<Matrix, Matrix> construct_mixed_witness(const MembershipMatrix& theta,
                                                  const Matrix& B, double rho,
                                                  double epsilon);

/// No-pure-node construction: Theta2 = Theta M, B2 = M^{-1} (rho B) M^{-T}
/// for the explicit mixing matrix M (requires community 1 to have no pure
/// node, 0 < epsilon < 1 - max_i theta_i1, and rho B entries inside (0,1)).
/// The returned B2 absorbs rho: Theta2 B2 Theta2^T equals rho Theta B Theta^T.
std::pair<Matrix, Matrix> construct_no_pure_witness(const MembershipMatrix& theta,
                                                    const Matrix& B, double rho,
                                                    double epsilon);

/// Convenience wrapper: epsilon starts at half the pure-node deficit and is
/// halved (up to 50 times) until the constructed B2 lands strictly in (0,1).
std::pair<Matrix, Matrix> construct_no_pure_witness_auto(const MembershipMatrix& theta,
                                                         const Matrix& B, double rho);

namespace detail {

/// Symmetric rank-revealing split of B: finds r independent rows (pivot
/// order), the permutation placing them first, and W with
/// B_perm = [I; W^T] C [I | W].
struct RankSplit {
  int rank = 0;
  std::vector<Index> order;  // permutation, independent rows first
  Matrix C;                  // r x r, nonsingular
  Matrix W;                  // r x (K - r)
};

RankSplit rank_split(const Matrix& B);

/// Simplex-preserving perturbation direction of the rank-deficient witness
/// (row-sum zero, annihilated by the corner geometry), in the original
/// community order. Throws when B is full rank or in the rank-(K-1)
/// identifiable case.
Vector mixed_witness_direction(const Matrix& B);

}  // namespace detail

}  // namespace spacl
