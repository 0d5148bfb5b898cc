#pragma once

#include "sglr/solvers/common.hpp"
#include "sglr/solvers/preconditioners.hpp"

#include <cmath>

namespace sglr::solvers {

struct MinresConfig {
  double tol = 1e-6;
  int max_iterations = 500;
  double eps_rel = 1e-7;
  std::optional<Eigen::Index> rank_cap;  // callers default this to n_xi / 5

  void validate() const {
    require(tol > 0.0, "minres: tolerance must be positive");
    require(max_iterations >= 1, "minres: max iterations must be >= 1");
    require(eps_rel >= 0.0, "minres: truncation tolerance must be >= 0");
    require(!rank_cap || *rank_cap >= 1, "minres: rank cap must be >= 1");
  }
};

/// [[sum_l G_l (x) K_l, I (x) B^T], [I (x) B, 0]] acting on (velocity,
/// pressure) coefficient blocks.
class SaddleOperator {
 public:
  SaddleOperator(OperatorStack velocity, SparseMatrix B)
      : ops_(std::move(velocity)), B_(std::move(B)), Bt_(B_.transpose()) {
    if (B_.cols() != ops_.spatial_size()) throw DimensionError("saddle operator: B has wrong column count");
  }

  [[nodiscard]] const OperatorStack& velocity() const { return ops_; }
  [[nodiscard]] const SparseMatrix& B() const { return B_; }
  [[nodiscard]] Eigen::Index n_u() const { return B_.cols(); }
  [[nodiscard]] Eigen::Index n_p() const { return B_.rows(); }
  [[nodiscard]] Eigen::Index chaos_size() const { return ops_.chaos_size(); }

  template <class T>
  Block2<T> apply(const Block2<T>& X) const {
    if (X.u.rows() != n_u() || X.p.rows() != n_p()) throw DimensionError("saddle operator: block size mismatch");
    const T Btp = map_rows(X.p, [&](const Eigen::MatrixXd& Y) { return Eigen::MatrixXd(Bt_ * Y); });
    return {combine(1.0, apply_operator(ops_, X.u), 1.0, Btp),
            map_rows(X.u, [&](const Eigen::MatrixXd& Y) { return Eigen::MatrixXd(B_ * Y); })};
  }

  template <class T>
  Block2<T> zero() const {
    return {Coefficients<T>::zero(n_u(), chaos_size()), Coefficients<T>::zero(n_p(), chaos_size())};
  }

  /// Assembled saddle matrix on (vec(U); vec(P)).
  [[nodiscard]] SparseMatrix assemble() const {
    const SparseMatrix A = ops_.kronecker_sum();
    const Eigen::Index nxi = chaos_size();
    const Eigen::Index NU = A.rows();
    std::vector<Eigen::Triplet<double>> t;
    for (int k = 0; k < A.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(A, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
    for (Eigen::Index q = 0; q < nxi; ++q)
      for (int k = 0; k < B_.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(B_, k); it; ++it) {
          const Eigen::Index r = NU + q * n_p() + it.row();
          const Eigen::Index c = q * n_u() + it.col();
          t.emplace_back(r, c, it.value());
          t.emplace_back(c, r, it.value());
        }
    SparseMatrix S(NU + nxi * n_p(), NU + nxi * n_p());
    S.setFromTriplets(t.begin(), t.end());
    return S;
  }

 private:
  OperatorStack ops_;
  SparseMatrix B_;
  SparseMatrix Bt_;
};

/// Block-diagonal preconditioner diag(I (x) K0hat, I (x) M22).
struct BlockPreconditioner {
  MeanPreconditioner velocity;
  MeanPreconditioner pressure;

  template <class T>
  Block2<T> operator()(const Block2<T>& X) const {
    return {velocity(X.u), pressure(X.p)};
  }
};

/// Low-rank preconditioned MINRES. Convergence is tested on the recurrence
/// estimate |eta| / gamma_1 of the preconditioned residual; the true residual
/// is recomputed once at exit.
template <class T>
SolveResult<Block2<T>> minres_solve(const SaddleOperator& A, const Block2<T>& F, const BlockPreconditioner& M,
                                    const MinresConfig& cfg, const Block2<T>* X0 = nullptr) {
  cfg.validate();
  const TruncationSpec spec = TruncationSpec::relative(cfg.eps_rel, cfg.rank_cap);
  using B = Block2<T>;

  SolveResult<B> out{X0 ? *X0 : A.template zero<T>(), {}};
  auto& st = out.stats;
  B V_prev = A.template zero<T>();
  B V = X0 ? combine(1.0, F, -1.0, A.apply(out.X)) : F;
  B P = M(V);
  double gamma_prev = 0.0;
  double gamma = std::sqrt(std::max(0.0, inner(P, V)));
  const double fnorm = frobenius_norm(F);
  if (gamma == 0.0) {
    st.converged = true;
    st.true_residual = 0.0;
    return out;
  }
  const double gamma1 = gamma;
  double eta = gamma;
  double s_prev = 0.0, s = 0.0, c_prev = 1.0, c = 1.0;
  B W_prev = A.template zero<T>();
  B W = A.template zero<T>();

  for (int j = 1; j <= cfg.max_iterations; ++j) {
    P = scaled(P, 1.0 / gamma);
    const B R = truncate(A.apply(P), spec);
    const double delta = inner(R, P);
    const double back = j == 1 ? 0.0 : gamma / gamma_prev;
    B V_next = truncate(combine(1.0, R, -delta / gamma, V, -back, V_prev), spec);
    B P_next = M(V_next);
    const double ip = inner(P_next, V_next);
    if (ip < 0.0) throw NumericalError("minres: preconditioner is not positive definite");
    const double gamma_next = std::sqrt(ip);

    const double a0 = c * delta - c_prev * s * gamma;
    const double a1 = std::sqrt(a0 * a0 + gamma_next * gamma_next);
    const double a2 = s * delta + c_prev * c * gamma;
    const double a3 = s_prev * gamma;
    if (a1 == 0.0) throw NumericalError("minres: breakdown in the plane rotation");
    const double c_next = a0 / a1;
    const double s_next = gamma_next / a1;

    B W_next = truncate(combine(1.0 / a1, P, -a3 / a1, W_prev, -a2 / a1, W), spec);
    out.X = truncate(combine(1.0, out.X, c_next * eta, W_next), spec);
    eta = -s_next * eta;

    V_prev = std::move(V);
    V = std::move(V_next);
    W_prev = std::move(W);
    W = std::move(W_next);
    P = std::move(P_next);
    gamma_prev = gamma;
    gamma = gamma_next;
    s_prev = s;
    s = s_next;
    c_prev = c;
    c = c_next;

    st.iterations = j;
    st.relative_residual = std::abs(eta) / gamma1;
    st.max_rank = std::max(st.max_rank, out.X.rank());
    st.trace.push_back({j, st.relative_residual, out.X.rank()});
    if (st.relative_residual <= cfg.tol || gamma == 0.0) {
      st.converged = true;
      break;
    }
  }
  st.true_residual = fnorm > 0.0 ? stable_norm(combine(1.0, F, -1.0, A.apply(out.X))) / fnorm : 0.0;
  return out;
}

}  // namespace sglr::solvers
