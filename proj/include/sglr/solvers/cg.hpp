#pragma once

#include "sglr/solvers/common.hpp"
#include "sglr/solvers/preconditioners.hpp"

#include <cmath>

namespace sglr::solvers {

struct CgConfig {
  double tol = 1e-8;
  int max_iterations = 500;
  double eps_rel = 1e-10;
  std::optional<Eigen::Index> rank_cap;

  void validate() const {
    require(tol > 0.0, "cg: tolerance must be positive");
    require(max_iterations >= 1, "cg: max iterations must be >= 1");
    require(eps_rel >= 0.0, "cg: truncation tolerance must be >= 0");
  }
};

/// Preconditioned CG on factored iterates; the solution, residual and search
/// direction are truncated after each update.
template <class T>
SolveResult<T> cg_solve(const OperatorStack& ops, const T& F, const MeanPreconditioner& M, const CgConfig& cfg) {
  cfg.validate();
  if (F.rows() != ops.spatial_size() || F.cols() != ops.chaos_size()) {
    throw DimensionError("cg: right-hand side has wrong dimensions");
  }
  const TruncationSpec spec = TruncationSpec::relative(cfg.eps_rel, cfg.rank_cap);
  SolveResult<T> out{Coefficients<T>::zero(F.rows(), F.cols()), {}};
  auto& st = out.stats;
  const double fnorm = std::sqrt(std::max(0.0, inner(F, F)));
  if (fnorm == 0.0) {
    st.converged = true;
    st.true_residual = 0.0;
    return out;
  }
  T R = F;
  T Zr = M(R);
  T P = Zr;
  double rz = inner(R, Zr);
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    const T Q = apply_operator(ops, P);
    const double pq = inner(P, Q);
    if (!(pq > 0.0)) throw ConfigError("cg: operator is not positive definite (negative curvature)");
    const double alpha = rz / pq;
    out.X = truncate(combine(1.0, out.X, alpha, P), spec);
    R = truncate(combine(1.0, R, -alpha, Q), spec);
    const double r = std::sqrt(std::max(0.0, inner(R, R))) / fnorm;
    st.iterations = it;
    st.relative_residual = r;
    st.max_rank = std::max(st.max_rank, out.X.rank());
    st.trace.push_back({it, r, out.X.rank()});
    if (r <= cfg.tol) {
      st.converged = true;
      break;
    }
    Zr = M(R);
    const double rz_next = inner(R, Zr);
    P = truncate(combine(1.0, Zr, rz_next / rz, P), spec);
    rz = rz_next;
  }
  const T Rt = combine(1.0, F, -1.0, apply_operator(ops, out.X));
  st.true_residual = stable_norm(Rt) / fnorm;
  return out;
}

}  // namespace sglr::solvers
