#pragma once

#include "sglr/discretize/cholesky.hpp"
#include "sglr/discretize/problems.hpp"
#include "sglr/solvers/common.hpp"

#include <functional>
#include <memory>

namespace sglr::solvers {

/// One deterministic geometric V-cycle for a single SPD matrix per level:
/// damped Jacobi pre- and post-smoothing (symmetric, so the cycle is an SPD
/// operator), exact solve on the coarsest level.
class GeometricVCycle {
 public:
  GeometricVCycle(const discretize::GridHierarchy& h, int nu = 2, double omega = 2.0 / 3.0)
      : nu_(nu), omega_(omega) {
    if (h.size() == 0) throw DimensionError("V-cycle: empty hierarchy");
    for (const auto& lv : h.levels) {
      Level L;
      L.A = lv.K.front();
      L.P = lv.P;
      L.Pt = SparseMatrix(lv.P.transpose());
      L.dinv = L.A.diagonal().cwiseInverse();
      if (!L.dinv.allFinite()) throw NumericalError("V-cycle: zero diagonal");
      levels_.push_back(std::move(L));
    }
    coarse_ = std::make_shared<discretize::SpdSolver>(levels_.front().A);
  }

  [[nodiscard]] Eigen::MatrixXd apply(const Eigen::MatrixXd& B) const { return cycle(levels_.size() - 1, B); }

 private:
  struct Level {
    SparseMatrix A;
    SparseMatrix P;
    SparseMatrix Pt;
    Eigen::VectorXd dinv;
  };

  Eigen::MatrixXd cycle(std::size_t lv, const Eigen::MatrixXd& B) const {
    if (lv == 0) return coarse_->solve(B);
    const Level& L = levels_[lv];
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(B.rows(), B.cols());
    auto sweep = [&] {
      for (int k = 0; k < nu_; ++k) X += omega_ * (L.dinv.asDiagonal() * (B - L.A * X));
    };
    sweep();
    const Eigen::MatrixXd Rc = L.Pt * (B - L.A * X);
    X += L.P * cycle(lv - 1, Rc);
    sweep();
    return X;
  }

  int nu_;
  double omega_;
  std::vector<Level> levels_;
  std::shared_ptr<discretize::SpdSolver> coarse_;
};

/// Rank-preserving block preconditioner I (x) M^{-1}: acts on the left factor
/// of a coefficient matrix only.
class MeanPreconditioner {
 public:
  using Applicator = std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>;

  MeanPreconditioner() = default;
  explicit MeanPreconditioner(Applicator f) : f_(std::move(f)) {}

  /// K_0^{-1} through a sparse Cholesky factorization.
  static MeanPreconditioner exact(const SparseMatrix& K0) {
    auto s = std::make_shared<discretize::SpdSolver>(K0);
    return MeanPreconditioner([s](const Eigen::MatrixXd& Y) { return s->solve(Y); });
  }

  /// One geometric V-cycle on the mean matrices of the hierarchy.
  static MeanPreconditioner vcycle(const discretize::GridHierarchy& h) {
    auto v = std::make_shared<GeometricVCycle>(h);
    return MeanPreconditioner([v](const Eigen::MatrixXd& Y) { return v->apply(Y); });
  }

  /// diag(M)^{-1}.
  static MeanPreconditioner diagonal(const SparseMatrix& M) {
    const Eigen::VectorXd d = M.diagonal();
    if ((d.array() == 0.0).any()) throw NumericalError("diagonal preconditioner: singular diagonal");
    return MeanPreconditioner([dinv = Eigen::VectorXd(d.cwiseInverse())](const Eigen::MatrixXd& Y) {
      return Eigen::MatrixXd(dinv.asDiagonal() * Y);
    });
  }

  static MeanPreconditioner identity() {
    return MeanPreconditioner([](const Eigen::MatrixXd& Y) { return Y; });
  }

  [[nodiscard]] Eigen::MatrixXd apply(const Eigen::MatrixXd& Y) const { return f_(Y); }

  template <class T>
  T operator()(const T& X) const {
    return map_rows(X, f_);
  }

 private:
  Applicator f_;
};

enum class MeanSolveKind { exact, vcycle };

/// Velocity preconditioner built from the mean term of a problem.
inline MeanPreconditioner mean_preconditioner(const discretize::StokesProblem& p, MeanSolveKind kind,
                                              const discretize::GridHierarchy* h = nullptr) {
  if (kind == MeanSolveKind::vcycle) {
    if (!h) throw ConfigError("V-cycle preconditioner needs a grid hierarchy");
    return MeanPreconditioner::vcycle(*h);
  }
  return MeanPreconditioner::exact(p.K.front());
}

/// Pressure-mass preconditioner diag(M_p)^{-1}.
inline MeanPreconditioner pressure_preconditioner(const discretize::StokesProblem& p) {
  return MeanPreconditioner::diagonal(p.Mp);
}

}  // namespace sglr::solvers
