#include "spacl/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "spacl/rng.hpp"

namespace spacl {

namespace {

constexpr Index kDenseCutoff = 2048;

using MatVec = std::function<void(const Vector&, Vector&)>;

// (|lambda| desc, positive before negative, stable on original position).
std::vector<int> magnitude_order(const Vector& vals) {
  std::vector<int> idx(static_cast<size_t>(vals.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    const double ma = std::abs(vals[a]), mb = std::abs(vals[b]);
    if (ma != mb) return ma > mb;
    if ((vals[a] >= 0.0) != (vals[b] >= 0.0)) return vals[a] >= 0.0;
    return a < b;
  });
  return idx;
}

void fix_signs(Matrix& V) {
  for (Index k = 0; k < V.cols(); ++k) {
    Index best = 0;
    double mx = -1.0;
    for (Index i = 0; i < V.rows(); ++i) {
      const double a = std::abs(V(i, k));
      if (a > mx) {
        mx = a;
        best = i;
      }
    }
    if (V(best, k) < 0.0) V.col(k) = -V.col(k);
  }
}

Spectrum finalize(const MatVec& mul, Index n, Vector vals, Matrix vecs) {
  const auto order = magnitude_order(vals);
  Spectrum s;
  const Index K = vals.size();
  s.eigenvalues.resize(K);
  s.eigenvectors.resize(n, K);
  for (Index k = 0; k < K; ++k) {
    s.eigenvalues[k] = vals[order[static_cast<size_t>(k)]];
    s.eigenvectors.col(k) = vecs.col(order[static_cast<size_t>(k)]);
  }
  fix_signs(s.eigenvectors);
  s.residuals.resize(K);
  Vector y(n);
  for (Index k = 0; k < K; ++k) {
    Vector v = s.eigenvectors.col(k);
    mul(v, y);
    s.residuals[k] = (y - s.eigenvalues[k] * v).norm();
  }
  return s;
}

Spectrum dense_top_k(const Matrix& A, int K, const EigsOptions&) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(A);
  if (solver.info() != Eigen::Success)
    throw EigsConvergenceError("dense eigendecomposition failed", 0.0);
  const Vector& all_vals = solver.eigenvalues();
  const Matrix& all_vecs = solver.eigenvectors();
  const auto order = magnitude_order(all_vals);
  Vector vals(K);
  Matrix vecs(A.rows(), K);
  for (int k = 0; k < K; ++k) {
    vals[k] = all_vals[order[static_cast<size_t>(k)]];
    vecs.col(k) = all_vecs.col(order[static_cast<size_t>(k)]);
  }
  return finalize([&A](const Vector& x, Vector& y) { y.noalias() = A * x; },
                  A.rows(), std::move(vals), std::move(vecs));
}

// Thick-restart Lanczos with full reorthogonalization. The projected matrix
// T = V' A V is formed explicitly each cycle (subspace dims stay small), so
// the arrowhead structure after a restart needs no special casing.
Spectrum lanczos_top_k(const MatVec& mul, Index n, int K, const EigsOptions& opts) {
  const int m = static_cast<int>(std::min<Index>(n, std::max(2 * K + 10, 20)));
  const int max_restarts = opts.max_restarts > 0 ? opts.max_restarts : 300 * K;

  rng::Engine eng(opts.start_seed);
  Matrix V(n, m);  // orthonormal basis
  Matrix W(n, m);  // W = A V, filled column by column
  Vector w(n), y(n);

  auto random_unit = [&](Vector& v) {
    for (Index i = 0; i < n; ++i) v[i] = rng::standard_normal(eng);
    v.normalize();
  };

  auto orthonormalize_against = [&](Vector& v, int cols) -> bool {
    for (int pass = 0; pass < 2; ++pass)
      if (cols > 0) v -= V.leftCols(cols) * (V.leftCols(cols).transpose() * v);
    const double nrm = v.norm();
    if (nrm < 1e-12) return false;
    v /= nrm;
    return true;
  };

  int cur = 0;  // columns currently in the basis
  {
    Vector v0(n);
    random_unit(v0);
    V.col(0) = v0;
    mul(v0, y);
    W.col(0) = y;
    cur = 1;
  }

  double norm_est = 1.0;
  double worst_res = std::numeric_limits<double>::infinity();

  for (int restart = 0; restart < max_restarts; ++restart) {
    // Extend the basis to m columns.
    while (cur < m) {
      w = W.col(cur - 1);
      if (!orthonormalize_against(w, cur)) random_unit(w), orthonormalize_against(w, cur);
      V.col(cur) = w;
      mul(w, y);
      W.col(cur) = y;
      ++cur;
    }

    Matrix T = V.leftCols(cur).transpose() * W.leftCols(cur);
    T = ((T + T.transpose()) * 0.5).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> small(T);
    const Vector& theta = small.eigenvalues();
    const Matrix& S = small.eigenvectors();
    norm_est = std::max(norm_est, theta.cwiseAbs().maxCoeff());

    const auto order = magnitude_order(theta);
    const double thresh = opts.tol * std::max(1.0, norm_est);

    // True residuals of the K wanted Ritz pairs.
    Matrix ritz_v(n, K), ritz_w(n, K);
    Vector ritz_val(K), res(K);
    for (int k = 0; k < K; ++k) {
      const int j = order[static_cast<size_t>(k)];
      ritz_val[k] = theta[j];
      ritz_v.col(k) = V.leftCols(cur) * S.col(j);
      ritz_w.col(k) = W.leftCols(cur) * S.col(j);
      res[k] = (ritz_w.col(k) - ritz_val[k] * ritz_v.col(k)).norm();
    }
    worst_res = res.maxCoeff();
    if (worst_res <= thresh || cur >= n) {
      return finalize(mul, n, std::move(ritz_val), std::move(ritz_v));
    }

    // Thick restart: keep the top-l Ritz vectors by |theta| plus a residual
    // continuation vector.
    const int l = std::min(m - 3, K + 8);
    Matrix keepS(cur, l);
    for (int k = 0; k < l; ++k) keepS.col(k) = S.col(order[static_cast<size_t>(k)]);
    Matrix newV = V.leftCols(cur) * keepS;
    Matrix newW = W.leftCols(cur) * keepS;
    V.leftCols(l) = newV;
    W.leftCols(l) = newW;
    cur = l;

    int worst = 0;
    for (int k = 1; k < K; ++k)
      if (res[k] > res[worst]) worst = k;
    w = ritz_w.col(worst) - ritz_val[worst] * ritz_v.col(worst);
    if (!orthonormalize_against(w, cur)) random_unit(w), orthonormalize_against(w, cur);
    V.col(cur) = w;
    mul(w, y);
    W.col(cur) = y;
    ++cur;
  }
  throw EigsConvergenceError("Lanczos did not converge within the restart budget",
                             worst_res);
}

Spectrum dispatch(const MatVec& mul, Index n, int K, const EigsOptions& opts,
                  const std::function<Matrix()>& densify) {
  if (K < 1) throw ValueError("top_k_eigs: K must be >= 1");
  if (K > n) throw DimensionError("top_k_eigs: K exceeds matrix dimension");
  EigsBackend backend = opts.backend;
  if (backend == EigsBackend::kAuto)
    backend = n <= kDenseCutoff ? EigsBackend::kDense : EigsBackend::kLanczos;
  if (backend == EigsBackend::kDense) return dense_top_k(densify(), K, opts);
  return lanczos_top_k(mul, n, K, opts);
}

}  // namespace

Spectrum top_k_eigs(const SparseSymmetricGraph& a, int K, const EigsOptions& opts) {
  return dispatch([&a](const Vector& x, Vector& y) { a.multiply(x, y); }, a.n(), K,
                  opts, [&a] { return a.densify(); });
}

Spectrum top_k_eigs(const DenseSymmetricMatrix& a, int K, const EigsOptions& opts) {
  return dispatch([&a](const Vector& x, Vector& y) { a.multiply(x, y); }, a.n(), K,
                  opts, [&a] { return a.matrix(); });
}

Spectrum population_spectrum(const MembershipMatrix& theta, const ModelParams& params) {
  if (theta.K() != params.K())
    throw DimensionError("population_spectrum: community count mismatch");
  const Matrix& T = theta.theta();
  const Index n = T.rows();
  const int K = params.K();
  // P = rho Theta B Theta^T = Q (rho R B R^T) Q^T with Theta = Q R.
  Eigen::HouseholderQR<Matrix> qr(T);
  Matrix Q = qr.householderQ() * Matrix::Identity(n, K);
  Matrix R = qr.matrixQR().topRows(K).triangularView<Eigen::Upper>();
  Matrix core = params.rho() * (R * params.B() * R.transpose());
  core = ((core + core.transpose()) * 0.5).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> small(core);

  const auto order = magnitude_order(small.eigenvalues());
  Spectrum s;
  s.eigenvalues.resize(K);
  s.eigenvectors.resize(n, K);
  for (int k = 0; k < K; ++k) {
    s.eigenvalues[k] = small.eigenvalues()[order[static_cast<size_t>(k)]];
    s.eigenvectors.col(k) = Q * small.eigenvectors().col(order[static_cast<size_t>(k)]);
  }
  fix_signs(s.eigenvectors);
  s.residuals = Vector::Zero(K);  // exact by construction (up to QR round-off)
  return s;
}

EigenIntervalPartition discretize_eigenvalues(const Vector& eigenvalues) {
  std::vector<int> pos, neg;
  for (int i = 0; i < eigenvalues.size(); ++i) {
    if (eigenvalues[i] > 0.0)
      pos.push_back(i);
    else if (eigenvalues[i] < 0.0)
      neg.push_back(i);
  }
  if (pos.empty() && neg.empty())
    throw ValueError("discretize_eigenvalues: needs at least one nonzero eigenvalue");

  auto run = [&eigenvalues](std::vector<int> idx) {
    std::vector<EigenInterval> intervals;
    if (idx.empty()) return intervals;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
      const double ma = std::abs(eigenvalues[a]), mb = std::abs(eigenvalues[b]);
      return ma != mb ? ma < mb : a < b;
    });
    EigenInterval cur;
    cur.gap = std::abs(eigenvalues[idx[0]]);
    cur.members.push_back(idx[0]);
    for (size_t j = 1; j < idx.size(); ++j) {
      const double gap = std::abs(eigenvalues[idx[j]]) - std::abs(eigenvalues[idx[j - 1]]);
      if (gap > cur.gap) {
        intervals.push_back(std::move(cur));
        cur = EigenInterval{};
        cur.gap = gap;
      }
      cur.members.push_back(idx[j]);
    }
    intervals.push_back(std::move(cur));
    return intervals;
  };

  EigenIntervalPartition part;
  part.positive = run(std::move(pos));
  part.negative = run(std::move(neg));
  return part;
}

}  // namespace spacl
