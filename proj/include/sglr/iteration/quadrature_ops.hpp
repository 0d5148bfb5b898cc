#pragma once

// Pointwise operations on gPC-expanded vectors evaluated at quadrature
// points: normalization, Gram-Schmidt and the subspace angle. Everything is
// computed on factors, so the cost is O((n_x + n_xi) n_q k).

#include "sglr/chaos/chaos_basis.hpp"
#include "sglr/chaos/smolyak.hpp"
#include "sglr/lowrank/coefficient_space.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace sglr::iteration {

using lowrank::Coefficients;
using lowrank::FactoredMatrix;
using lowrank::TruncationSpec;

/// Quadrature rule together with the basis values Psi (n_xi x n_q).
struct QuadratureContext {
  chaos::QuadratureRule rule;
  Eigen::MatrixXd Psi;

  QuadratureContext(const chaos::ChaosBasis& basis, chaos::QuadratureRule r)
      : rule(std::move(r)), Psi(basis.eval_many(rule.points)) {}

  [[nodiscard]] Eigen::Index size() const { return rule.size(); }
  [[nodiscard]] const Eigen::VectorXd& weights() const { return rule.weights; }
};

namespace detail {

// Z^T Psi: sample coordinates of X(xi_q) = Y c_q.
inline Eigen::MatrixXd coords(const FactoredMatrix& X, const QuadratureContext& q) {
  return X.Z().transpose() * q.Psi;
}

// <Y1 c1_q, Y2 c2_q> for every q.
inline Eigen::VectorXd sampled_inner(const FactoredMatrix& A, const Eigen::MatrixXd& Ca, const FactoredMatrix& B,
                                     const Eigen::MatrixXd& Cb) {
  const Eigen::MatrixXd G = A.Y().transpose() * B.Y();
  return (Ca.array() * (G * Cb).array()).colwise().sum().transpose();
}

// Coefficients of sum_q d_q X(xi_q) psi(xi_q)^T eta_q in factored form.
inline FactoredMatrix project(const FactoredMatrix& X, const Eigen::MatrixXd& C, const Eigen::VectorXd& d,
                              const QuadratureContext& q) {
  const Eigen::VectorXd w = d.cwiseProduct(q.weights());
  return {X.Y(), q.Psi * (C.array().rowwise() * w.transpose().array()).matrix().transpose()};
}

}  // namespace detail

/// Coefficients of v(xi) / ||v(xi)||_2, with Y unchanged.
template <class T>
T normalize(const T& V, const QuadratureContext& q) {
  const FactoredMatrix F = Coefficients<T>::to_factored(V);
  if (F.rank() == 0) throw NumericalError("normalize: zero iterate");
  const Eigen::MatrixXd C = detail::coords(F, q);
  const Eigen::VectorXd n2 = detail::sampled_inner(F, C, F, C);
  const double scale = n2.maxCoeff();
  Eigen::VectorXd d(n2.size());
  for (Eigen::Index i = 0; i < n2.size(); ++i) {
    if (!(n2(i) > 1e-28 * scale)) throw NumericalError("normalize: vanishing sample at a quadrature point");
    d(i) = 1.0 / std::sqrt(n2(i));
  }
  return Coefficients<T>::from_factored(detail::project(F, C, d, q));
}

/// Stochastic Gram-Schmidt: u^s = v^s - sum_{t<s} <v^s,u^t>/<u^t,u^t> u^t
/// pointwise, projected on the basis by quadrature; each u^s is truncated and
/// then normalized after its projection sweep.
template <class T>
std::vector<T> gram_schmidt(const std::vector<T>& V, const QuadratureContext& q, const TruncationSpec& spec) {
  std::vector<T> U;
  std::vector<FactoredMatrix> Uf;
  std::vector<Eigen::MatrixXd> Uc;
  std::vector<Eigen::VectorXd> Un2;
  for (std::size_t s = 0; s < V.size(); ++s) {
    T W = V[s];
    if (s > 0) {
      const FactoredMatrix Vf = Coefficients<T>::to_factored(V[s]);
      const Eigen::MatrixXd Cv = detail::coords(Vf, q);
      const Eigen::VectorXd vn2 = detail::sampled_inner(Vf, Cv, Vf, Cv);
      for (std::size_t t = 0; t < s; ++t) {
        const Eigen::VectorXd ip = detail::sampled_inner(Vf, Cv, Uf[t], Uc[t]);
        Eigen::VectorXd c(ip.size());
        for (Eigen::Index i = 0; i < ip.size(); ++i) {
          const double ratio = std::abs(ip(i)) / std::sqrt(vn2(i) * Un2[t](i));
          if (ratio > 1.0 - 1e-12) throw NumericalError("gram_schmidt: degenerate subspace at a quadrature point");
          c(i) = ip(i) / Un2[t](i);
        }
        const T chi = Coefficients<T>::from_factored(detail::project(Uf[t], Uc[t], c, q));
        W = lowrank::combine(1.0, W, -1.0, chi);
      }
      W = truncate(W, spec);
    }
    U.push_back(normalize(W, q));
    Uf.push_back(Coefficients<T>::to_factored(U.back()));
    Uc.push_back(detail::coords(Uf.back(), q));
    Un2.push_back(detail::sampled_inner(Uf.back(), Uc.back(), Uf.back(), Uc.back()));
  }
  return U;
}

/// Samples of a list of expansions in a common orthonormal basis Q of the
/// span of their left factors: X_i(xi_q) = Q coords[i].col(q).
struct SampledFamily {
  Eigen::MatrixXd Q;
  std::vector<Eigen::MatrixXd> coords;
};

template <class T>
SampledFamily sample_family(const std::vector<const T*>& X, const QuadratureContext& q) {
  std::vector<FactoredMatrix> F;
  Eigen::Index K = 0;
  for (const T* x : X) {
    F.push_back(Coefficients<T>::to_factored(*x));
    K += F.back().rank();
  }
  const Eigen::Index n = F.front().rows();
  Eigen::MatrixXd Yall(n, K);
  Eigen::Index off = 0;
  for (const auto& f : F) {
    Yall.middleCols(off, f.rank()) = f.Y();
    off += f.rank();
  }
  SampledFamily out;
  const Eigen::Index r = std::min(n, K);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Yall);
  out.Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, r);
  const Eigen::MatrixXd R = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  off = 0;
  for (const auto& f : F) {
    out.coords.push_back(R.middleCols(off, f.rank()) * detail::coords(f, q));
    off += f.rank();
  }
  return out;
}

/// Largest principal angle between the column spaces of A and B.
inline double principal_angle(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  auto orth = [](const Eigen::MatrixXd& X) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
    const Eigen::VectorXd d = qr.matrixQR().diagonal().cwiseAbs();
    if (d.minCoeff() <= 1e-13 * d.maxCoeff()) throw NumericalError("subspace angle: rank-deficient sampled basis");
    return Eigen::MatrixXd(qr.householderQ() * Eigen::MatrixXd::Identity(X.rows(), X.cols()));
  };
  const Eigen::MatrixXd Qa = orth(A);
  const Eigen::MatrixXd Qb = orth(B);
  // sin of the largest angle, accurate for small angles (unlike acos).
  const Eigen::MatrixXd D = Qb - Qa * (Qa.transpose() * Qb);
  const double s = D.cols() == 1 ? D.norm() : Eigen::JacobiSVD<Eigen::MatrixXd>(D).singularValues()(0);
  return std::asin(std::min(1.0, s));
}

/// Expected largest principal angle between span{U^s(xi)} and
/// span{U_prev^s(xi)} under the quadrature rule.
template <class T>
double subspace_angle(const std::vector<T>& U, const std::vector<T>& U_prev, const QuadratureContext& q) {
  if (U.size() != U_prev.size() || U.empty()) throw DimensionError("subspace angle: list sizes differ");
  std::vector<const T*> all;
  for (const auto& u : U) all.push_back(&u);
  for (const auto& u : U_prev) all.push_back(&u);
  const SampledFamily fam = sample_family(all, q);
  const std::size_t ne = U.size();
  const Eigen::Index r = fam.Q.cols();
  double acc = 0.0;
  Eigen::MatrixXd A(r, static_cast<Eigen::Index>(ne));
  Eigen::MatrixXd B(r, static_cast<Eigen::Index>(ne));
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    for (std::size_t s = 0; s < ne; ++s) {
      A.col(static_cast<Eigen::Index>(s)) = fam.coords[s].col(i);
      B.col(static_cast<Eigen::Index>(s)) = fam.coords[ne + s].col(i);
    }
    acc += q.weights()(i) * principal_angle(A, B);
  }
  return acc;
}

}  // namespace sglr::iteration
