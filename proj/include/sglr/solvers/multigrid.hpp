#pragma once

#include "sglr/discretize/cholesky.hpp"
#include "sglr/discretize/problems.hpp"
#include "sglr/solvers/common.hpp"

#include <Eigen/SparseCholesky>

#include <memory>

namespace sglr::solvers {

struct MultigridConfig {
  int nu = 2;
  double omega = 2.0 / 3.0;
  double tol = 1e-6;
  int max_iterations = 50;
  double eps_abs = 1e-8;  // outer solution and residual updates
  double eps_rel = 1e-2;  // smoothing and V-cycle residuals
  std::optional<Eigen::Index> rank_cap;

  void validate() const {
    require(nu >= 1, "multigrid: smoothing steps must be >= 1");
    require(omega > 0.0 && omega < 1.0, "multigrid: damping must lie in (0, 1)");
    require(tol > 0.0, "multigrid: tolerance must be positive");
    require(max_iterations >= 1, "multigrid: max iterations must be >= 1");
    require(eps_abs >= 0.0 && eps_rel >= 0.0, "multigrid: truncation tolerances must be >= 0");
  }
};

/// Low-rank geometric multigrid for sum_l A_l X G_l^T = F.
///
/// Smoothing is the mean-based block Jacobi step X <- X + omega (I (x) K_0^{-1})
/// (F - A(X)); the coarsest level is solved directly on the assembled
/// Kronecker sum. Factorizations are built once in the constructor.
template <class T>
class Multigrid {
 public:
  Multigrid(const discretize::GridHierarchy& h, const std::vector<SparseMatrix>& G) {
    if (h.size() == 0) throw DimensionError("multigrid: empty hierarchy");
    for (const auto& lv : h.levels) {
      if (lv.K.size() != G.size()) throw DimensionError("multigrid: term count mismatch");
      Level L;
      std::vector<lowrank::OperatorTerm> terms;
      for (std::size_t l = 0; l < G.size(); ++l) terms.push_back({G[l], lv.K[l]});
      L.ops = OperatorStack(std::move(terms));
      L.P = lv.P;
      L.Pt = SparseMatrix(lv.P.transpose());
      levels_.push_back(std::move(L));
    }
    for (std::size_t i = 1; i < levels_.size(); ++i) {
      levels_[i].smoother = std::make_shared<discretize::SpdSolver>(levels_[i].ops.mean());
    }
    coarse_ = std::make_shared<Eigen::SimplicialLLT<SparseMatrix>>(levels_.front().ops.kronecker_sum());
    if (coarse_->info() != Eigen::Success) {
      throw NumericalError("multigrid: coarsest-level Kronecker factorization failed");
    }
  }

  [[nodiscard]] const OperatorStack& fine_operator() const { return levels_.back().ops; }

  SolveResult<T> solve(const T& F, const MultigridConfig& cfg, const T* X0 = nullptr) const {
    cfg.validate();
    const auto& ops = fine_operator();
    if (F.rows() != ops.spatial_size() || F.cols() != ops.chaos_size()) {
      throw DimensionError("multigrid: right-hand side has wrong dimensions");
    }
    const TruncationSpec abs = TruncationSpec::absolute(cfg.eps_abs, cfg.rank_cap);
    const TruncationSpec rel = TruncationSpec::relative(cfg.eps_rel, cfg.rank_cap);

    SolveResult<T> out{X0 ? *X0 : Coefficients<T>::zero(F.rows(), F.cols()), {}};
    const double r0 = std::sqrt(std::max(0.0, inner(F, F)));
    if (r0 == 0.0) {
      out.X = Coefficients<T>::zero(F.rows(), F.cols());
      out.stats.converged = true;
      return out;
    }
    T R = X0 ? truncate(combine(1.0, F, -1.0, apply_operator(ops, out.X)), abs) : F;
    double r = std::sqrt(std::max(0.0, inner(R, R)));
    auto& st = out.stats;
    while (r > cfg.tol * r0 && st.iterations < cfg.max_iterations) {
      const T C = vcycle(levels_.size() - 1, R, cfg, rel);
      out.X = truncate(combine(1.0, out.X, 1.0, C), abs);
      R = truncate(combine(1.0, F, -1.0, apply_operator(ops, out.X)), abs);
      r = std::sqrt(std::max(0.0, inner(R, R)));
      ++st.iterations;
      st.max_rank = std::max(st.max_rank, out.X.rank());
      st.trace.push_back({st.iterations, r / r0, out.X.rank()});
    }
    st.relative_residual = r / r0;
    st.converged = r <= cfg.tol * r0;
    return out;
  }

 private:
  struct Level {
    OperatorStack ops;
    SparseMatrix P;
    SparseMatrix Pt;
    std::shared_ptr<discretize::SpdSolver> smoother;
  };

  T smooth(const Level& L, T X, const T& F, const MultigridConfig& cfg, const TruncationSpec& rel) const {
    for (int k = 0; k < cfg.nu; ++k) {
      const T R = combine(1.0, F, -1.0, apply_operator(L.ops, X));
      const T S = map_rows(R, [&](const Eigen::MatrixXd& Y) { return L.smoother->solve(Y); });
      X = truncate(combine(1.0, X, cfg.omega, S), rel);
    }
    return X;
  }

  T coarse_solve(const T& F) const {
    const Eigen::MatrixXd D = to_dense(F);
    const Eigen::VectorXd x = coarse_->solve(Eigen::Map<const Eigen::VectorXd>(D.data(), D.size()));
    const Eigen::MatrixXd Xd = Eigen::Map<const Eigen::MatrixXd>(x.data(), D.rows(), D.cols());
    return Coefficients<T>::from_dense(Xd, TruncationSpec::relative(0.0));
  }

  T vcycle(std::size_t lv, const T& F, const MultigridConfig& cfg, const TruncationSpec& rel) const {
    if (lv == 0) return coarse_solve(F);
    const Level& L = levels_[lv];
    T X = smooth(L, Coefficients<T>::zero(F.rows(), F.cols()), F, cfg, rel);
    const T R = truncate(combine(1.0, F, -1.0, apply_operator(L.ops, X)), rel);
    const T Rc = map_rows(R, [&](const Eigen::MatrixXd& Y) { return Eigen::MatrixXd(L.Pt * Y); });
    const T C = vcycle(lv - 1, Rc, cfg, rel);
    X = combine(1.0, X, 1.0, map_rows(C, [&](const Eigen::MatrixXd& Y) { return Eigen::MatrixXd(L.P * Y); }));
    return smooth(L, std::move(X), F, cfg, rel);
  }

  std::vector<Level> levels_;
  std::shared_ptr<Eigen::SimplicialLLT<SparseMatrix>> coarse_;
};

template <class T>
SolveResult<T> multigrid_solve(const discretize::GridHierarchy& h, const std::vector<SparseMatrix>& G, const T& F,
                               const MultigridConfig& cfg) {
  return Multigrid<T>(h, G).solve(F, cfg);
}

}  // namespace sglr::solvers
