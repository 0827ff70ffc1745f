#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>

#include "metricnet/error.hpp"

namespace metricnet {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct SingularValueSummary {
  double sigma_max = 0.0;
  double sigma_min = 0.0;
};

namespace detail {

/// Deterministic, non-degenerate start vector.
inline Eigen::VectorXd start_vector(Eigen::Index n) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = 1.0 + 0.5 * std::sin(1.0 + 2.3 * static_cast<double>(i));
  return v.normalized();
}

/// Largest eigenvalue of a symmetric positive semidefinite operator by
/// Lanczos with full reorthogonalization. Stops once the Ritz value changes
/// by at most rel_tol (relative) over two consecutive steps; extreme Ritz
/// values converge quadratically faster than their vectors, so this is
/// reached long before the residual criterion in clustered spectra.
inline double lanczos_largest(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply,
                              Eigen::Index n, double rel_tol, int max_steps = 300) {
  max_steps = static_cast<int>(std::min<Eigen::Index>(max_steps, n));
  Eigen::MatrixXd basis(n, max_steps);
  Eigen::VectorXd alpha(max_steps), beta(max_steps);
  basis.col(0) = start_vector(n);
  double previous = 0.0;
  int stable = 0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  for (int j = 0; j < max_steps; ++j) {
    Eigen::VectorXd w = apply(basis.col(j));
    alpha[j] = basis.col(j).dot(w);
    for (int pass = 0; pass < 2; ++pass)
      w -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).transpose() * w);
    beta[j] = w.norm();

    Eigen::VectorXd diag = alpha.head(j + 1);
    Eigen::VectorXd sub = j > 0 ? Eigen::VectorXd(beta.head(j)) : Eigen::VectorXd(0);
    eig.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    double theta = eig.eigenvalues()[j];
    bool exhausted = beta[j] <= std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(theta));
    stable = std::abs(theta - previous) <= rel_tol * std::abs(theta) ? stable + 1 : 0;
    if (exhausted || j + 1 == max_steps || stable >= 2) return theta;
    previous = theta;
    basis.col(j + 1) = w / beta[j];
  }
  return previous;
}

}  // namespace detail

/// Largest and smallest singular values. Matrices with at most `dense_limit`
/// rows go through a dense SVD; larger ones use Lanczos on TᵀT for σ_max and
/// Lanczos on (TᵀT)⁻¹ through a sparse LU of T for σ_min.
inline SingularValueSummary singular_value_summary(const SparseMatrix& t,
                                                   Eigen::Index dense_limit = 64,
                                                   double rel_tol = 1e-10) {
  require(t.rows() == t.cols() && t.rows() > 0, ErrorKind::invalid_parameter,
          "singular values need a non-empty square matrix");
  if (t.rows() <= dense_limit) {
    Eigen::MatrixXd dense(t);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(dense);
    const auto& s = svd.singularValues();
    return {s[0], s[s.size() - 1]};
  }

  SparseMatrix tt = SparseMatrix(t.transpose());
  double sigma_max2 = detail::lanczos_largest(
      [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return tt * (t * x); }, t.cols(), rel_tol);
  SingularValueSummary out{std::sqrt(std::max(sigma_max2, 0.0)), 0.0};

  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(t);
  lu.factorize(t);
  if (lu.info() != Eigen::Success) return out;  // exactly singular pivot
  double inv_min2 = detail::lanczos_largest(
      [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        Eigen::VectorXd y = lu.transpose().solve(x);
        return lu.solve(y);
      },
      t.cols(), rel_tol);
  if (!std::isfinite(inv_min2) || inv_min2 <= 0.0) return out;
  out.sigma_min = std::min(out.sigma_max, 1.0 / std::sqrt(inv_min2));
  return out;
}

/// Orthonormal (Euclidean) basis of the right singular vectors with
/// σ < rank_tol · σ_max.
inline Eigen::MatrixXd nullspace(const SparseMatrix& t, double rank_tol,
                                 Eigen::Index dense_limit = 64) {
  const Eigen::Index n = t.cols();
  if (t.rows() <= dense_limit) {
    Eigen::MatrixXd dense(t);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(dense, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    double threshold = rank_tol * s[0];
    Eigen::Index rank = 0;
    while (rank < s.size() && s[rank] >= threshold) ++rank;
    return svd.matrixV().rightCols(n - rank);
  }

  // Subspace iteration on (TᵀT + μI)⁻¹, then Rayleigh-Ritz with T itself so
  // the reported singular values keep full precision.
  SparseMatrix tt = SparseMatrix(t.transpose());
  SparseMatrix gram = tt * t;
  double sigma_max = singular_value_summary(t, dense_limit).sigma_max;
  double threshold = rank_tol * sigma_max;
  double shift = 1e-10 * sigma_max * sigma_max;
  SparseMatrix shifted = gram;
  for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) += shift;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(shifted);
  require(ldlt.info() == Eigen::Success, ErrorKind::numerical_failure,
          "factorization for nullspace extraction failed");

  Eigen::Index block = std::min<Eigen::Index>(8, n);
  while (true) {
    Eigen::MatrixXd x(n, block);
    for (Eigen::Index j = 0; j < block; ++j)
      for (Eigen::Index i = 0; i < n; ++i)
        x(i, j) = std::sin(0.7 + 1.3 * static_cast<double>(i) + 2.9 * static_cast<double>(j) +
                           0.11 * static_cast<double>(i * j));
    Eigen::Index kernel = 0;
    Eigen::MatrixXd ritz;
    for (int iter = 0; iter < 60; ++iter) {
      x = ldlt.solve(x);
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
      x = qr.householderQ() * Eigen::MatrixXd::Identity(n, block);
      Eigen::MatrixXd tx = t * x;
      Eigen::JacobiSVD<Eigen::MatrixXd> small(tx, Eigen::ComputeThinV);
      const auto& s = small.singularValues();
      kernel = 0;
      for (Eigen::Index j = 0; j < s.size(); ++j)
        if (s[j] < threshold) ++kernel;
      ritz = x * small.matrixV();
      // converged once the kernel part is tiny and the rest clearly above threshold
      bool settled = kernel < block ? s[block - kernel - 1] > 10.0 * threshold : true;
      if (iter >= 2 && settled) break;
    }
    if (kernel < block || block == n) return ritz.rightCols(kernel);
    block = std::min<Eigen::Index>(2 * block, n);
  }
}

}  // namespace metricnet
