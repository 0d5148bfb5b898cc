#pragma once

// Tensor-product Lagrange finite elements on the uniform square mesh of
// [-1, 1]^2 with 2^{n_c} elements per direction. Nodes are numbered
// lexicographically by (x_1, x_2): full index = i1 * n1d + i2.

#include "sglr/errors.hpp"
#include "sglr/lowrank/operator_stack.hpp"
#include "sglr/randfield/kl_expansion.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <functional>
#include <vector>

namespace sglr::discretize {

/// Nodes of a Q1 or Q2 scalar space, with a subset of free (non-Dirichlet)
/// nodes given per direction as [lo, hi] index ranges.
struct ScalarSpace {
  int n_c = 0;
  int degree = 1;
  int lo1 = 0, hi1 = 0;  // free node range in x_1
  int lo2 = 0, hi2 = 0;  // free node range in x_2

  [[nodiscard]] int elements() const { return 1 << n_c; }
  [[nodiscard]] double h() const { return 2.0 / elements(); }
  [[nodiscard]] int nodes_1d() const { return degree * elements() + 1; }
  [[nodiscard]] double coord(int i) const { return -1.0 + i * h() / degree; }
  [[nodiscard]] int free1() const { return hi1 - lo1 + 1; }
  [[nodiscard]] int free2() const { return hi2 - lo2 + 1; }
  [[nodiscard]] Eigen::Index size() const { return static_cast<Eigen::Index>(free1()) * free2(); }

  /// Free index of node (i1, i2), or -1 for a constrained node.
  [[nodiscard]] Eigen::Index free_index(int i1, int i2) const {
    if (i1 < lo1 || i1 > hi1 || i2 < lo2 || i2 > hi2) return -1;
    return static_cast<Eigen::Index>(i1 - lo1) * free2() + (i2 - lo2);
  }

  /// Coordinates of the free nodes (2 x size).
  [[nodiscard]] Eigen::Matrix2Xd free_coordinates() const {
    Eigen::Matrix2Xd X(2, size());
    for (int i1 = lo1; i1 <= hi1; ++i1)
      for (int i2 = lo2; i2 <= hi2; ++i2) {
        const Eigen::Index k = free_index(i1, i2);
        X(0, k) = coord(i1);
        X(1, k) = coord(i2);
      }
    return X;
  }

  /// Q1 with homogeneous Dirichlet conditions on the whole boundary.
  static ScalarSpace q1_interior(int n_c) {
    const int N = 1 << n_c;
    return {n_c, 1, 1, N - 1, 1, N - 1};
  }
  static ScalarSpace q1_all(int n_c) {
    const int N = 1 << n_c;
    return {n_c, 1, 0, N, 0, N};
  }
  /// Q2 with Dirichlet conditions on x_1 = -1 and x_2 = +-1 (outflow at x_1 = 1).
  static ScalarSpace q2_channel(int n_c) {
    const int N = 1 << n_c;
    return {n_c, 2, 1, 2 * N, 1, 2 * N - 1};
  }
};

namespace detail {

inline constexpr int nquad = 3;

inline const std::array<double, nquad>& gauss3_nodes() {
  static const std::array<double, nquad> x{-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
  return x;
}
inline const std::array<double, nquad>& gauss3_weights() {
  static const std::array<double, nquad> w{5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  return w;
}

/// 1D Lagrange shape functions of the given degree on [-1, 1] and their
/// derivatives, tabulated at the three Gauss points: [a][q].
struct Shape1D {
  int degree;
  std::vector<std::array<double, nquad>> val;
  std::vector<std::array<double, nquad>> der;

  explicit Shape1D(int deg) : degree(deg), val(static_cast<std::size_t>(deg + 1)), der(static_cast<std::size_t>(deg + 1)) {
    for (int q = 0; q < nquad; ++q) {
      const double t = gauss3_nodes()[static_cast<std::size_t>(q)];
      const auto uq = static_cast<std::size_t>(q);
      if (deg == 1) {
        val[0][uq] = 0.5 * (1 - t);
        val[1][uq] = 0.5 * (1 + t);
        der[0][uq] = -0.5;
        der[1][uq] = 0.5;
      } else if (deg == 2) {
        val[0][uq] = 0.5 * t * (t - 1);
        val[1][uq] = 1 - t * t;
        val[2][uq] = 0.5 * t * (t + 1);
        der[0][uq] = t - 0.5;
        der[1][uq] = -2 * t;
        der[2][uq] = t + 0.5;
      } else {
        throw ConfigError("only Q1 and Q2 elements are supported");
      }
    }
  }
};

/// Calls f(e1, e2, x1[q1], x2[q2]) per element with the physical Gauss
/// point coordinates.
template <class F>
void for_each_element(int n_c, F&& f) {
  const int N = 1 << n_c;
  const double h = 2.0 / N;
  std::array<double, nquad> x1{};
  std::array<double, nquad> x2{};
  for (int e1 = 0; e1 < N; ++e1) {
    for (int q = 0; q < nquad; ++q)
      x1[static_cast<std::size_t>(q)] = -1.0 + h * (e1 + 0.5 * (1 + gauss3_nodes()[static_cast<std::size_t>(q)]));
    for (int e2 = 0; e2 < N; ++e2) {
      for (int q = 0; q < nquad; ++q)
        x2[static_cast<std::size_t>(q)] = -1.0 + h * (e2 + 0.5 * (1 + gauss3_nodes()[static_cast<std::size_t>(q)]));
      f(e1, e2, x1, x2);
    }
  }
}

}  // namespace detail

/// Quadrature points of the 3x3 Gauss rule on every element (2 x 9 N^2).
inline Eigen::Matrix2Xd element_quadrature_points(int n_c) {
  const int N = 1 << n_c;
  Eigen::Matrix2Xd P(2, static_cast<Eigen::Index>(N) * N * 9);
  Eigen::Index k = 0;
  detail::for_each_element(n_c, [&](int, int, const auto& x1, const auto& x2) {
    for (double a : x1)
      for (double b : x2) {
        P(0, k) = a;
        P(1, k) = b;
        ++k;
      }
  });
  return P;
}

/// Scalar stiffness matrix int c(x) grad(phi_i) . grad(phi_j) on the free
/// nodes of `space`.
inline SparseMatrix assemble_stiffness(const ScalarSpace& space, const std::function<double(double, double)>& c) {
  const detail::Shape1D s(space.degree);
  const int d = space.degree;
  const int nl = d + 1;
  const double h = space.h();
  const double jac = 0.25 * h * h;
  const double g = 2.0 / h;
  const auto& w = detail::gauss3_weights();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(space.elements()) * space.elements() * nl * nl * nl * nl);
  Eigen::MatrixXd Ke(nl * nl, nl * nl);
  std::array<std::array<double, detail::nquad>, detail::nquad> cw{};
  detail::for_each_element(space.n_c, [&](int e1, int e2, const auto& x1, const auto& x2) {
    for (int q1 = 0; q1 < detail::nquad; ++q1)
      for (int q2 = 0; q2 < detail::nquad; ++q2) {
        const auto u1 = static_cast<std::size_t>(q1);
        const auto u2 = static_cast<std::size_t>(q2);
        cw[u1][u2] = w[u1] * w[u2] * jac * c(x1[u1], x2[u2]);
      }
    Ke.setZero();
    for (int a1 = 0; a1 < nl; ++a1)
      for (int a2 = 0; a2 < nl; ++a2)
        for (int b1 = 0; b1 < nl; ++b1)
          for (int b2 = 0; b2 < nl; ++b2) {
            double v = 0.0;
            const auto A1 = static_cast<std::size_t>(a1), A2 = static_cast<std::size_t>(a2);
            const auto B1 = static_cast<std::size_t>(b1), B2 = static_cast<std::size_t>(b2);
            for (std::size_t q1 = 0; q1 < detail::nquad; ++q1)
              for (std::size_t q2 = 0; q2 < detail::nquad; ++q2) {
                const double gx = s.der[A1][q1] * s.val[A2][q2] * s.der[B1][q1] * s.val[B2][q2];
                const double gy = s.val[A1][q1] * s.der[A2][q2] * s.val[B1][q1] * s.der[B2][q2];
                v += cw[q1][q2] * g * g * (gx + gy);
              }
            Ke(a1 * nl + a2, b1 * nl + b2) = v;
          }
    for (int a = 0; a < nl * nl; ++a) {
      const Eigen::Index ia = space.free_index(d * e1 + a / nl, d * e2 + a % nl);
      if (ia < 0) continue;
      for (int b = 0; b < nl * nl; ++b) {
        const Eigen::Index ib = space.free_index(d * e1 + b / nl, d * e2 + b % nl);
        if (ib >= 0) trip.emplace_back(ia, ib, Ke(a, b));
      }
    }
  });
  SparseMatrix K(space.size(), space.size());
  K.setFromTriplets(trip.begin(), trip.end());
  // Exact symmetry: average with the transpose to remove summation-order noise.
  SparseMatrix Kt = K.transpose();
  K = 0.5 * (K + Kt);
  K.prune(0.0);
  return K;
}

/// Scalar mass matrix on the free nodes of `space`.
inline SparseMatrix assemble_mass(const ScalarSpace& space) {
  const detail::Shape1D s(space.degree);
  const int d = space.degree;
  const int nl = d + 1;
  const double h = space.h();
  const double jac = 0.25 * h * h;
  const auto& w = detail::gauss3_weights();
  Eigen::MatrixXd M1 = Eigen::MatrixXd::Zero(nl, nl);
  for (int a = 0; a < nl; ++a)
    for (int b = 0; b < nl; ++b)
      for (std::size_t q = 0; q < detail::nquad; ++q)
        M1(a, b) += w[q] * s.val[static_cast<std::size_t>(a)][q] * s.val[static_cast<std::size_t>(b)][q];
  std::vector<Eigen::Triplet<double>> trip;
  detail::for_each_element(space.n_c, [&](int e1, int e2, const auto&, const auto&) {
    for (int a = 0; a < nl * nl; ++a) {
      const Eigen::Index ia = space.free_index(d * e1 + a / nl, d * e2 + a % nl);
      if (ia < 0) continue;
      for (int b = 0; b < nl * nl; ++b) {
        const Eigen::Index ib = space.free_index(d * e1 + b / nl, d * e2 + b % nl);
        if (ib >= 0) trip.emplace_back(ia, ib, jac * M1(a / nl, b / nl) * M1(a % nl, b % nl));
      }
    }
  });
  SparseMatrix M(space.size(), space.size());
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

/// Blocks (D_1, D_2) with [D_i]_{kj} = -int psi_k d(phi_j)/dx_i, psi from the
/// pressure space and phi from the velocity space.
inline std::pair<SparseMatrix, SparseMatrix> assemble_divergence(const ScalarSpace& vel, const ScalarSpace& pres) {
  if (vel.n_c != pres.n_c) throw DimensionError("divergence: spaces on different meshes");
  const detail::Shape1D sv(vel.degree);
  const detail::Shape1D sp(pres.degree);
  const int dv = vel.degree, dp = pres.degree;
  const int nv = dv + 1, np = dp + 1;
  const double h = vel.h();
  const double jac = 0.25 * h * h;
  const double g = 2.0 / h;
  const auto& w = detail::gauss3_weights();
  std::vector<Eigen::Triplet<double>> t1, t2;
  detail::for_each_element(vel.n_c, [&](int e1, int e2, const auto&, const auto&) {
    for (int k = 0; k < np * np; ++k) {
      const Eigen::Index ik = pres.free_index(dp * e1 + k / np, dp * e2 + k % np);
      if (ik < 0) continue;
      const auto K1 = static_cast<std::size_t>(k / np), K2 = static_cast<std::size_t>(k % np);
      for (int j = 0; j < nv * nv; ++j) {
        const Eigen::Index ij = vel.free_index(dv * e1 + j / nv, dv * e2 + j % nv);
        if (ij < 0) continue;
        const auto J1 = static_cast<std::size_t>(j / nv), J2 = static_cast<std::size_t>(j % nv);
        double v1 = 0.0, v2 = 0.0;
        for (std::size_t q1 = 0; q1 < detail::nquad; ++q1)
          for (std::size_t q2 = 0; q2 < detail::nquad; ++q2) {
            const double wq = w[q1] * w[q2] * jac * sp.val[K1][q1] * sp.val[K2][q2];
            v1 += wq * g * sv.der[J1][q1] * sv.val[J2][q2];
            v2 += wq * g * sv.val[J1][q1] * sv.der[J2][q2];
          }
        t1.emplace_back(ik, ij, -v1);
        t2.emplace_back(ik, ij, -v2);
      }
    }
  });
  SparseMatrix D1(pres.size(), vel.size()), D2(pres.size(), vel.size());
  D1.setFromTriplets(t1.begin(), t1.end());
  D2.setFromTriplets(t2.begin(), t2.end());
  return {std::move(D1), std::move(D2)};
}

/// K_0 .. K_m for the coefficient expansion of a KL field.
inline std::vector<SparseMatrix> assemble_stiffness_stack(const ScalarSpace& space, const randfield::KLExpansion& kl) {
  std::vector<SparseMatrix> K;
  K.reserve(static_cast<std::size_t>(kl.size() + 1));
  for (int l = 0; l <= kl.size(); ++l) {
    K.push_back(assemble_stiffness(space, [&kl, l](double x1, double x2) { return kl.coefficient(l, x1, x2); }));
  }
  return K;
}

/// Interpolation between consecutive levels of a 1D Lagrange node set, on the
/// full node range (fine x coarse).
inline Eigen::MatrixXd interpolation_1d(int degree, int coarse_elements) {
  const int nc = degree * coarse_elements + 1;
  const int nf = 2 * degree * coarse_elements + 1;
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(nf, nc);
  if (degree == 1) {
    for (int i = 0; i < nc; ++i) P(2 * i, i) = 1.0;
    for (int i = 0; i + 1 < nc; ++i) P(2 * i + 1, i) = P(2 * i + 1, i + 1) = 0.5;
  } else {
    // Coarse element e has nodes 2e, 2e+1, 2e+2 and covers fine nodes 4e..4e+4.
    for (int e = 0; e < coarse_elements; ++e) {
      const int c = 2 * e;
      const int f = 4 * e;
      P(f, c) = 1.0;
      P(f + 1, c) = 3.0 / 8, P(f + 1, c + 1) = 3.0 / 4, P(f + 1, c + 2) = -1.0 / 8;
      P(f + 2, c + 1) = 1.0;
      P(f + 3, c) = -1.0 / 8, P(f + 3, c + 1) = 3.0 / 4, P(f + 3, c + 2) = 3.0 / 8;
      P(f + 4, c + 2) = 1.0;
    }
  }
  return P;
}

/// Prolongation from `coarse` to `fine` restricted to free nodes. Constrained
/// coarse nodes carry homogeneous values and are dropped.
inline SparseMatrix prolongation(const ScalarSpace& coarse, const ScalarSpace& fine) {
  if (fine.n_c != coarse.n_c + 1 || fine.degree != coarse.degree) throw DimensionError("prolongation: bad level pair");
  const Eigen::MatrixXd P1 = interpolation_1d(coarse.degree, coarse.elements());
  const Eigen::MatrixXd A = P1.block(fine.lo1, coarse.lo1, fine.free1(), coarse.free1());
  const Eigen::MatrixXd B = P1.block(fine.lo2, coarse.lo2, fine.free2(), coarse.free2());
  std::vector<Eigen::Triplet<double>> t;
  for (int i1 = 0; i1 < A.rows(); ++i1)
    for (int j1 = 0; j1 < A.cols(); ++j1) {
      if (A(i1, j1) == 0.0) continue;
      for (int i2 = 0; i2 < B.rows(); ++i2)
        for (int j2 = 0; j2 < B.cols(); ++j2)
          if (B(i2, j2) != 0.0)
            t.emplace_back(static_cast<Eigen::Index>(i1) * B.rows() + i2, static_cast<Eigen::Index>(j1) * B.cols() + j2,
                           A(i1, j1) * B(i2, j2));
    }
  SparseMatrix P(fine.size(), coarse.size());
  P.setFromTriplets(t.begin(), t.end());
  return P;
}

/// blockdiag(A, A).
inline SparseMatrix block_diag2(const SparseMatrix& A) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(2 * A.nonZeros()));
  for (int k = 0; k < A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(A, k); it; ++it) {
      t.emplace_back(it.row(), it.col(), it.value());
      t.emplace_back(it.row() + A.rows(), it.col() + A.cols(), it.value());
    }
  SparseMatrix D(2 * A.rows(), 2 * A.cols());
  D.setFromTriplets(t.begin(), t.end());
  return D;
}

}  // namespace sglr::discretize
