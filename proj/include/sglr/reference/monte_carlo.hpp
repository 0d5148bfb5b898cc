#pragma once

// Deterministic eigensolves at sample points.

#include "sglr/discretize/cholesky.hpp"
#include "sglr/discretize/eigensolve.hpp"
#include "sglr/discretize/problems.hpp"
#include "sglr/parallel.hpp"

#include <Eigen/SparseLU>

#include <vector>

namespace sglr::reference {

/// Sample eigenpairs: values ascending, vectors in physical space with unit
/// mass norm.
struct SampleEigen {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

/// n_e smallest pairs of K(xi) u = lambda M u.
inline SampleEigen mc_sample(const discretize::DiffusionProblem& p, const Eigen::VectorXd& xi, int n_e,
                             double tol = 1e-10) {
  const discretize::SpdSolver K(p.K_at(xi));
  auto e = discretize::shift_invert_subspace([&](const Eigen::MatrixXd& B) { return K.solve(B); }, p.M, n_e, tol);
  return {std::move(e.values), std::move(e.vectors)};
}

inline SparseMatrix saddle_matrix(const SparseMatrix& K, const SparseMatrix& B) {
  const Eigen::Index nu = K.rows();
  const Eigen::Index np = B.rows();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(K.nonZeros() + 2 * B.nonZeros()));
  for (int k = 0; k < K.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(K, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (int k = 0; k < B.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(B, k); it; ++it) {
      t.emplace_back(nu + it.row(), it.col(), it.value());
      t.emplace_back(it.col(), nu + it.row(), it.value());
    }
  SparseMatrix A(nu + np, nu + np);
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

/// n_e smallest pairs of B K(xi)^{-1} B^T q = lambda M_p q. S^{-1} r is the
/// pressure part of the saddle solve with right-hand side (0, -r).
inline SampleEigen mc_sample(const discretize::StokesProblem& p, const Eigen::VectorXd& xi, int n_e,
                             double tol = 1e-10) {
  Eigen::SparseLU<SparseMatrix> lu(saddle_matrix(p.K_at(xi), p.B));
  if (lu.info() != Eigen::Success) throw NumericalError("saddle factorization failed");
  const Eigen::Index nu = p.n_u();
  const Eigen::Index np = p.n_p();
  auto solve = [&](const Eigen::MatrixXd& R) {
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nu + np, R.cols());
    rhs.bottomRows(np) = -R;
    const Eigen::MatrixXd z = lu.solve(rhs);
    return Eigen::MatrixXd(z.bottomRows(np));
  };
  auto e = discretize::shift_invert_subspace(solve, p.Mp, n_e, tol);
  return {std::move(e.values), std::move(e.vectors)};
}

template <class Problem>
std::vector<SampleEigen> mc_eigensolve(const Problem& p, const Eigen::MatrixXd& points, int n_e, double tol = 1e-10,
                                       unsigned threads = 0) {
  std::vector<SampleEigen> out(static_cast<std::size_t>(points.cols()));
  parallel_for(out.size(), threads, [&](std::size_t r) {
    out[r] = mc_sample(p, points.col(static_cast<Eigen::Index>(r)), n_e, tol);
  });
  return out;
}

}  // namespace sglr::reference
