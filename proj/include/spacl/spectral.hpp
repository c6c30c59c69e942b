#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "spacl/model.hpp"

namespace spacl {

/// Top-K eigenpairs of a symmetric matrix, sorted by descending |lambda|
/// (positive before negative on magnitude ties). Columns of eigenvectors are
/// orthonormal; each column's largest-magnitude entry is positive.
struct Spectrum {
  Vector eigenvalues;   // length K
  Matrix eigenvectors;  // n x K
  Vector residuals;     // ||A v_k - lambda_k v_k||
};

struct EigsConvergenceError : std::runtime_error {
  double worst_residual;
  EigsConvergenceError(const std::string& msg, double res)
      : std::runtime_error(msg), worst_residual(res) {}
};

enum class EigsBackend { kAuto, kDense, kLanczos };

struct EigsOptions {
  double tol = 1e-8;
  int max_restarts = -1;  // -1 -> 300 * K
  EigsBackend backend = EigsBackend::kAuto;
  std::uint64_t start_seed = 0x5eedULL;  // fixed internal starting-vector seed
};

/// kAuto routes to a dense full decomposition for n <= 2048 and to restarted
/// Lanczos (full reorthogonalization, selection by |lambda|) above.
Spectrum top_k_eigs(const SparseSymmetricGraph& a, int K, const EigsOptions& opts = {});
Spectrum top_k_eigs(const DenseSymmetricMatrix& a, int K, const EigsOptions& opts = {});

/// Exact spectrum of P = rho Theta B Theta^T through the K x K problem
/// (thin QR of Theta); avoids forming the n x n matrix.
Spectrum population_spectrum(const MembershipMatrix& theta, const ModelParams& params);

/// One interval of the eigenvalue discretization: consecutive members (on
/// |lambda|, ascending) are within gap of each other, and the gap to the next
/// interval strictly exceeds it.
struct EigenInterval {
  double gap = 0.0;
  std::vector<int> members;  // indices into the input vector, ascending |lambda|
};

struct EigenIntervalPartition {
  std::vector<EigenInterval> positive;
  std::vector<EigenInterval> negative;
};

/// Splits nonzero eigenvalues into sign classes and partitions each on
/// absolute values: the smallest magnitude seeds g_1, and each gap strictly
/// exceeding the current g starts the next interval with that gap.
EigenIntervalPartition discretize_eigenvalues(const Vector& eigenvalues);

}  // namespace spacl
