#pragma once

#include "sglr/errors.hpp"
#include "sglr/lowrank/operator_stack.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <functional>
#include <random>

namespace sglr::discretize {

struct EigenPairs {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // M-orthonormal columns
  int iterations = 0;
};

/// Fixes the sign of each column so that its largest-magnitude entry is
/// positive.
inline void canonical_signs(Eigen::MatrixXd& X) {
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    Eigen::Index i = 0;
    X.col(j).cwiseAbs().maxCoeff(&i);
    if (X(i, j) < 0.0) X.col(j) *= -1.0;
  }
}

/// n_e smallest eigenpairs of S x = lambda M x for SPD S and M, given only
/// the action of S^{-1}. Block subspace iteration with Rayleigh-Ritz
/// projection; the Ritz residual of S y = M x is available without applying S.
///
/// Stops when ||S x_j - theta_j M x_j|| <= tol * theta_j ||M x_j|| for the
/// wanted pairs.
inline EigenPairs shift_invert_subspace(const std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>& solve,
                                        const SparseMatrix& M, int n_e, double tol = 1e-10,
                                        int max_iterations = 500, int guard = 4) {
  const Eigen::Index n = M.rows();
  if (n_e < 1 || n_e > n) throw ConfigError("eigensolve: invalid number of eigenpairs");
  const Eigen::Index p = std::min<Eigen::Index>(n, n_e + std::max(guard, n_e));
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd X(n, p);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = g(rng);

  EigenPairs out;
  for (int it = 1; it <= max_iterations; ++it) {
    const Eigen::MatrixXd MX = M * X;
    const Eigen::MatrixXd Y = solve(MX);
    const Eigen::MatrixXd MY = M * Y;
    Eigen::MatrixXd Sr = Y.transpose() * MX;
    Sr = 0.5 * (Sr + Sr.transpose()).eval();
    Eigen::MatrixXd Mr = Y.transpose() * MY;
    Mr = 0.5 * (Mr + Mr.transpose()).eval();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Sr, Mr);
    if (es.info() != Eigen::Success) throw NumericalError("eigensolve: Rayleigh-Ritz step failed");
    const Eigen::MatrixXd V = es.eigenvectors();
    const Eigen::VectorXd theta = es.eigenvalues();
    X = Y * V;
    const Eigen::MatrixXd SX = MX * V;
    const Eigen::MatrixXd MXn = MY * V;
    bool done = true;
    for (int j = 0; j < n_e; ++j) {
      const double r = (SX.col(j) - theta(j) * MXn.col(j)).norm();
      if (r > tol * std::abs(theta(j)) * MXn.col(j).norm()) done = false;
    }
    out.iterations = it;
    if (done) {
      out.values = theta.head(n_e);
      out.vectors = X.leftCols(n_e);
      canonical_signs(out.vectors);
      return out;
    }
  }
  throw NumericalError("eigensolve: subspace iteration did not converge");
}

}  // namespace sglr::discretize
