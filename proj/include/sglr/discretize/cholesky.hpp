#pragma once

#include "sglr/errors.hpp"
#include "sglr/lowrank/operator_stack.hpp"

#include <Eigen/SparseCholesky>

namespace sglr::discretize {

/// M = L L^T with a genuinely lower-triangular sparse L (no fill-reducing
/// permutation), so that L and L^T can be used as change-of-variable maps.
class Cholesky {
 public:
  Cholesky() = default;

  explicit Cholesky(const SparseMatrix& M) : n_(M.rows()) {
    if (M.rows() != M.cols()) throw DimensionError("cholesky: matrix not square");
    Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::NaturalOrdering<int>> llt(M);
    if (llt.info() != Eigen::Success) throw NumericalError("cholesky: matrix is not positive definite");
    L_ = llt.matrixL();
    L_.makeCompressed();
    Lt_ = L_.transpose();
  }

  [[nodiscard]] Eigen::Index size() const { return n_; }
  [[nodiscard]] const SparseMatrix& L() const { return L_; }

  [[nodiscard]] Eigen::MatrixXd apply_L(const Eigen::MatrixXd& X) const { return L_ * X; }
  [[nodiscard]] Eigen::MatrixXd apply_Lt(const Eigen::MatrixXd& X) const { return Lt_ * X; }
  [[nodiscard]] Eigen::MatrixXd solve_L(const Eigen::MatrixXd& X) const {
    return L_.triangularView<Eigen::Lower>().solve(X);
  }
  [[nodiscard]] Eigen::MatrixXd solve_Lt(const Eigen::MatrixXd& X) const {
    return Lt_.triangularView<Eigen::Upper>().solve(X);
  }

 private:
  Eigen::Index n_ = 0;
  SparseMatrix L_;
  SparseMatrix Lt_;
};

/// Fill-reducing sparse Cholesky for repeated solves with an SPD matrix.
class SpdSolver {
 public:
  SpdSolver() = default;
  explicit SpdSolver(const SparseMatrix& A) { factor(A); }

  void factor(const SparseMatrix& A) {
    llt_.compute(A);
    if (llt_.info() != Eigen::Success) throw NumericalError("sparse Cholesky failed: matrix is not positive definite");
  }

  [[nodiscard]] Eigen::MatrixXd solve(const Eigen::MatrixXd& B) const { return llt_.solve(B); }
  [[nodiscard]] Eigen::Index size() const { return llt_.rows(); }

 private:
  Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> llt_;
};

}  // namespace sglr::discretize
