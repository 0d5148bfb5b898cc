#pragma once

// Problem adapters for the inverse iteration driver. Both work in the
// transformed variable w = L^T u (M = L L^T), in which the eigenproblem is
// standard and eigenvectors are Euclidean-orthonormal.

#include "sglr/chaos/chaos_basis.hpp"
#include "sglr/discretize/cholesky.hpp"
#include "sglr/discretize/eigensolve.hpp"
#include "sglr/discretize/problems.hpp"
#include "sglr/iteration/schedule.hpp"
#include "sglr/solvers/cg.hpp"
#include "sglr/solvers/minres.hpp"
#include "sglr/solvers/multigrid.hpp"

#include <Eigen/Eigenvalues>

#include <memory>
#include <utility>
#include <vector>

namespace sglr::iteration {

using solvers::SolveStats;

template <class T>
struct InnerResult {
  T V;
  SolveStats stats;
};

struct MeanEigen {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;  // transformed variable, unit 2-norm columns
};

inline lowrank::OperatorStack make_stack(const std::vector<SparseMatrix>& G, const std::vector<SparseMatrix>& K) {
  if (G.size() != K.size()) throw DimensionError("operator stack: term count mismatch");
  std::vector<lowrank::OperatorTerm> t;
  for (std::size_t l = 0; l < G.size(); ++l) t.push_back({G[l], K[l]});
  return lowrank::OperatorStack(std::move(t));
}

template <class T>
std::vector<T> rank_one_iterates(const Eigen::MatrixXd& W, Eigen::Index n_xi) {
  std::vector<T> out;
  const Eigen::VectorXd e0 = Eigen::VectorXd::Unit(n_xi, 0);
  for (Eigen::Index s = 0; s < W.cols(); ++s) {
    out.push_back(lowrank::Coefficients<T>::from_factored(lowrank::FactoredMatrix::outer(W.col(s), e0)));
  }
  return out;
}

/// Diffusion eigenproblem K(xi) u = lambda M u; inner solves by low-rank
/// multigrid on sum_l G_l (x) K_l v^ = (I (x) L) u, v = (I (x) L^T) v^.
template <class T>
class DiffusionAdapter {
 public:
  static constexpr Benchmark kind = Benchmark::diffusion;
  using coefficient_type = T;

  DiffusionAdapter(const discretize::DiffusionProblem& p, const chaos::ChaosBasis& basis,
                   const discretize::GridHierarchy& h, solvers::MultigridConfig base = {})
      : p_(&p), basis_(&basis), ops_(make_stack(basis.G(), p.K)), mg_(std::make_shared<solvers::Multigrid<T>>(h, basis.G())),
        base_(base) {}

  [[nodiscard]] Eigen::Index n_vec() const { return p_->n_x(); }
  [[nodiscard]] Eigen::Index chaos_size() const { return basis_->size(); }

  [[nodiscard]] MeanEigen mean_eigen(int n_e, double tol = 1e-12) const {
    const discretize::SpdSolver K0(p_->K[0]);
    const auto e = discretize::shift_invert_subspace([&](const Eigen::MatrixXd& B) { return K0.solve(B); }, p_->M,
                                                     n_e, tol);
    Eigen::MatrixXd W = p_->chol.apply_Lt(e.vectors);
    discretize::canonical_signs(W);
    return {e.values, W};
  }

  [[nodiscard]] InnerResult<T> solve(const T& U, const InnerTolerances& t) const {
    solvers::MultigridConfig cfg = base_;
    cfg.tol = t.tol;
    cfg.eps_abs = t.eps_abs;
    cfg.eps_rel = t.eps_rel;
    const auto& L = p_->chol;
    const T F = map_rows(U, [&](const Eigen::MatrixXd& Y) { return L.apply_L(Y); });
    auto res = mg_->solve(F, cfg);
    return {map_rows(res.X, [&](const Eigen::MatrixXd& Y) { return L.apply_Lt(Y); }), std::move(res.stats)};
  }

  /// (U, A U) with A = L^{-1} K L^{-T}, the right factor truncated.
  [[nodiscard]] std::pair<T, T> rayleigh_pair(const T& U, double eps_abs) const {
    const auto& L = p_->chol;
    const T R = map_rows(U, [&](const Eigen::MatrixXd& Y) { return L.solve_Lt(Y); });
    T W = apply_operator(ops_, R);
    W = map_rows(W, [&](const Eigen::MatrixXd& Y) { return L.solve_L(Y); });
    return {U, truncate(W, lowrank::TruncationSpec::absolute(eps_abs))};
  }

  /// A(xi) W for a deterministic block W.
  [[nodiscard]] Eigen::MatrixXd apply_sample(const Eigen::VectorXd& xi, const Eigen::MatrixXd& W) const {
    const auto& L = p_->chol;
    return L.solve_L(p_->K_at(xi) * L.solve_Lt(W));
  }

  /// Physical-space eigenvectors u = L^{-T} w (M-orthonormal).
  [[nodiscard]] Eigen::MatrixXd physical(const Eigen::MatrixXd& W) const { return p_->chol.solve_Lt(W); }

 private:
  const discretize::DiffusionProblem* p_;
  const chaos::ChaosBasis* basis_;
  lowrank::OperatorStack ops_;
  std::shared_ptr<solvers::Multigrid<T>> mg_;
  solvers::MultigridConfig base_;
};

/// Stokes inf-sup eigenproblem B K(xi)^{-1} B^T q = lambda M_p q; inner solves
/// by low-rank MINRES on the coupled saddle system, Rayleigh quotients by
/// low-rank CG on the velocity operator.
template <class T>
class StokesAdapter {
 public:
  static constexpr Benchmark kind = Benchmark::stokes;
  using coefficient_type = T;

  StokesAdapter(const discretize::StokesProblem& p, const chaos::ChaosBasis& basis, solvers::MeanPreconditioner velocity,
                solvers::MinresConfig base = {}, solvers::CgConfig cg = {})
      : p_(&p),
        basis_(&basis),
        op_(make_stack(basis.G(), p.K), p.B),
        M_{std::move(velocity), solvers::MeanPreconditioner::diagonal(p.Mp)},
        base_(base),
        cg_(cg) {
    if (!base_.rank_cap) base_.rank_cap = std::max<Eigen::Index>(1, basis.size() / 5);
  }

  [[nodiscard]] Eigen::Index n_vec() const { return p_->n_p(); }
  [[nodiscard]] Eigen::Index chaos_size() const { return basis_->size(); }
  [[nodiscard]] const solvers::SaddleOperator& saddle() const { return op_; }

  [[nodiscard]] MeanEigen mean_eigen(int n_e) const {
    const discretize::SpdSolver K0(p_->K[0]);
    const Eigen::MatrixXd Bt = Eigen::MatrixXd(SparseMatrix(p_->B.transpose()));
    Eigen::MatrixXd S = Eigen::MatrixXd(p_->B * K0.solve(Bt));
    S = 0.5 * (S + S.transpose()).eval();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::MatrixXd(p_->Mp));
    if (es.info() != Eigen::Success) throw NumericalError("mean Schur eigensolve failed");
    Eigen::MatrixXd W = p_->chol.apply_Lt(es.eigenvectors().leftCols(n_e));
    discretize::canonical_signs(W);
    return {es.eigenvalues().head(n_e), W};
  }

  [[nodiscard]] InnerResult<T> solve(const T& U, const InnerTolerances& t) const {
    solvers::MinresConfig cfg = base_;
    cfg.tol = t.tol;
    cfg.eps_rel = t.eps_rel;
    const auto& L = p_->chol;
    const solvers::Block2<T> F{lowrank::Coefficients<T>::zero(p_->n_u(), chaos_size()),
                               map_rows(U, [&](const Eigen::MatrixXd& Y) { return Eigen::MatrixXd(-L.apply_L(Y)); })};
    auto res = solvers::minres_solve(op_, F, M_, cfg);
    return {map_rows(res.X.p, [&](const Eigen::MatrixXd& Y) { return L.apply_Lt(Y); }), std::move(res.stats)};
  }

  /// (U^, W) with U^ = B^T L^{-T} U and sum_l G_l (x) K_l W = U^, so that
  /// u^T A u = U^^T K^{-1} U^.
  [[nodiscard]] std::pair<T, T> rayleigh_pair(const T& U, double eps_abs) const {
    const auto& L = p_->chol;
    const SparseMatrix& B = p_->B;
    const T Uh = map_rows(U, [&](const Eigen::MatrixXd& Y) { return Eigen::MatrixXd(B.transpose() * L.solve_Lt(Y)); });
    auto res = solvers::cg_solve(op_.velocity(), Uh, M_.velocity, cg_);
    if (!res.stats.converged) throw NumericalError("Rayleigh quotient: CG did not converge");
    return {Uh, truncate(res.X, lowrank::TruncationSpec::absolute(eps_abs))};
  }

  [[nodiscard]] Eigen::MatrixXd apply_sample(const Eigen::VectorXd& xi, const Eigen::MatrixXd& W) const {
    const auto& L = p_->chol;
    const discretize::SpdSolver K(p_->K_at(xi));
    return L.solve_L(p_->B * K.solve(p_->B.transpose() * L.solve_Lt(W)));
  }

  [[nodiscard]] Eigen::MatrixXd physical(const Eigen::MatrixXd& W) const { return p_->chol.solve_Lt(W); }

 private:
  const discretize::StokesProblem* p_;
  const chaos::ChaosBasis* basis_;
  solvers::SaddleOperator op_;
  solvers::BlockPreconditioner M_;
  solvers::MinresConfig base_;
  solvers::CgConfig cg_;
};

}  // namespace sglr::iteration
