#pragma once

#include "sglr/chaos/chaos_basis.hpp"
#include "sglr/errors.hpp"
#include "sglr/lowrank/coefficient_space.hpp"

#include <cmath>
#include <vector>

namespace sglr::iteration {

/// gPC coefficients of x(xi)^T y(xi): lambda_r = <Gtilde_r, H> with
/// H = X^T Y = Z_x (Y_x^T Y_y) Z_y^T.
template <class T>
Eigen::VectorXd product_coefficients(const T& X, const T& Y, const chaos::ChaosBasis& basis) {
  const lowrank::FactoredMatrix a = lowrank::Coefficients<T>::to_factored(X);
  const lowrank::FactoredMatrix b = lowrank::Coefficients<T>::to_factored(Y);
  if (a.rows() != b.rows() || a.cols() != basis.size() || b.cols() != basis.size()) {
    throw DimensionError("product coefficients: dimension mismatch");
  }
  if (a.rank() == 0 || b.rank() == 0) return Eigen::VectorXd::Zero(basis.size());
  const Eigen::MatrixXd H = a.Z() * (a.Y().transpose() * b.Y()) * b.Z().transpose();
  return basis.contract_gtilde(H);
}

struct SymmetricEigen {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // orthonormal columns
};

/// Cyclic Jacobi eigensolver for small symmetric matrices.
inline SymmetricEigen jacobi_eigen(Eigen::MatrixXd A, int max_sweeps = 100) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n) throw DimensionError("jacobi_eigen: matrix not square");
  Eigen::MatrixXd V = Eigen::MatrixXd::Identity(n, n);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) off += A(i, j) * A(i, j);
    if (off <= 1e-32 * std::max(1e-300, A.squaredNorm())) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (A(p, q) == 0.0) continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * A(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = A(k, p);
          const double akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = A(p, k);
          const double aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = V(k, p);
          const double vkq = V(k, q);
          V(k, p) = c * vkp - s * vkq;
          V(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return A(a, a) < A(b, b); });
  SymmetricEigen out{Eigen::VectorXd(n), Eigen::MatrixXd(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = A(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
    out.vectors.col(i) = V.col(order[static_cast<std::size_t>(i)]);
  }
  return out;
}

/// gPC coefficients of the n_e x n_e matrix T_st(xi) = u^s(xi)^T A(xi) u^t(xi),
/// given left factors (u^s, or a transformed u^s) and right factors (A u^t).
struct RitzCoefficients {
  std::vector<std::vector<Eigen::VectorXd>> T;  // T[s][t], symmetric

  [[nodiscard]] std::size_t size() const { return T.size(); }

  [[nodiscard]] Eigen::MatrixXd at(const Eigen::VectorXd& psi) const {
    const auto n = static_cast<Eigen::Index>(T.size());
    Eigen::MatrixXd out(n, n);
    for (Eigen::Index s = 0; s < n; ++s)
      for (Eigen::Index t = 0; t < n; ++t)
        out(s, t) = T[static_cast<std::size_t>(s)][static_cast<std::size_t>(t)].dot(psi);
    return 0.5 * (out + out.transpose());
  }
};

template <class T>
RitzCoefficients ritz_coefficients(const std::vector<T>& left, const std::vector<T>& right,
                                   const chaos::ChaosBasis& basis) {
  const std::size_t n = left.size();
  RitzCoefficients out;
  out.T.assign(n, std::vector<Eigen::VectorXd>(n));
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t = s; t < n; ++t) {
      // Average both orders so that T(xi) is symmetric even when the two
      // factorizations differ by truncation.
      Eigen::VectorXd c = product_coefficients(left[s], right[t], basis);
      if (t != s) c = 0.5 * (c + product_coefficients(left[t], right[s], basis));
      out.T[s][t] = c;
      out.T[t][s] = c;
    }
  }
  return out;
}

/// Refined sample eigenpairs from T(xi) = W Sigma W^T: eigenvalues ascending
/// and the mixing matrix W applied to the sampled basis [u^1 .. u^{n_e}].
struct RitzSample {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

inline RitzSample rayleigh_ritz_sample(const RitzCoefficients& rc, const Eigen::VectorXd& psi,
                                       const Eigen::MatrixXd& sampled_basis) {
  const SymmetricEigen e = jacobi_eigen(rc.at(psi));
  return {e.values, sampled_basis * e.vectors};
}

}  // namespace sglr::iteration
