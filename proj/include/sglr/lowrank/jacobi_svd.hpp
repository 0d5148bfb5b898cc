#pragma once

#include <Eigen/Dense>
#include <Eigen/Jacobi>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace sglr::lowrank {

/// Thin SVD A = U diag(s) V^T with singular values sorted descending.
struct SvdResult {
  Eigen::MatrixXd U;
  Eigen::VectorXd s;
  Eigen::MatrixXd V;
};

/**
 * One-sided (Hestenes) Jacobi SVD.
 *
 * Wide inputs are handled through the transpose. The input is first reduced
 * by a column-pivoted Householder QR, A P = Q R, and the sweeps run on R^T,
 * which is close to column-orthogonal already (Drmac-Veselic
 * preconditioning), so few sweeps are needed. Columns of the working matrix
 * are rotated pairwise until mutually orthogonal; their norms are the
 * singular values.
 */
inline SvdResult jacobi_svd(const Eigen::MatrixXd& A) {
  const Eigen::Index rows = A.rows();
  const Eigen::Index cols = A.cols();
  if (rows == 0 || cols == 0) {
    return {Eigen::MatrixXd(rows, 0), Eigen::VectorXd(0), Eigen::MatrixXd(cols, 0)};
  }
  if (rows < cols) {
    SvdResult t = jacobi_svd(A.transpose());
    return {std::move(t.V), std::move(t.s), std::move(t.U)};
  }

  // rows >= cols: A P = Q R, W = R^T (n x n). With W V = U_w S,
  // A = (Q V) S (P U_w)^T.
  const Eigen::Index n = cols;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  Eigen::MatrixXd W = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>().transpose();
  Eigen::MatrixXd V = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd norm2(n);
  for (Eigen::Index j = 0; j < n; ++j) norm2(j) = W.col(j).squaredNorm();

  const double eps = std::numeric_limits<double>::epsilon();
  constexpr int kMaxSweeps = 60;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double gamma = W.col(p).dot(W.col(q));
        const double alpha = norm2(p);
        const double beta = norm2(q);
        if (gamma == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        const Eigen::JacobiRotation<double> rot(c, s);
        W.applyOnTheRight(p, q, rot);
        V.applyOnTheRight(p, q, rot);
        // Exact updates of the rotated column norms; refreshed each sweep.
        norm2(p) = alpha - t * gamma;
        norm2(q) = beta + t * gamma;
      }
    }
    for (Eigen::Index j = 0; j < n; ++j) norm2(j) = W.col(j).squaredNorm();
    if (!rotated) break;
  }

  const Eigen::VectorXd sv = norm2.cwiseSqrt();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return sv(a) > sv(b); });

  SvdResult out;
  out.s.resize(n);
  Eigen::MatrixXd Uw(n, n);
  Eigen::MatrixXd Vs(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index j = order[static_cast<std::size_t>(k)];
    out.s(k) = sv(j);
    Vs.col(k) = V.col(j);
    if (sv(j) > 0.0) {
      Uw.col(k) = W.col(j) / sv(j);
    } else {
      Uw.col(k).setZero();
    }
  }
  out.U = Eigen::MatrixXd::Zero(rows, n);
  out.U.topRows(n) = Vs;
  out.U.applyOnTheLeft(qr.householderQ());
  out.V = qr.colsPermutation() * Uw;
  return out;
}

}  // namespace sglr::lowrank
