#pragma once

#include "sglr/discretize/cholesky.hpp"
#include "sglr/discretize/fem.hpp"
#include "sglr/randfield/kl_expansion.hpp"

#include <string>
#include <vector>

namespace sglr::discretize {

/// sum_l K_l xi_l with xi_0 = 1.
inline SparseMatrix combine(const std::vector<SparseMatrix>& K, const Eigen::VectorXd& xi) {
  if (xi.size() + 1 < static_cast<Eigen::Index>(K.size())) throw DimensionError("combine: xi too short");
  SparseMatrix out = K.front();
  for (std::size_t l = 1; l < K.size(); ++l) out += xi(static_cast<Eigen::Index>(l - 1)) * K[l];
  return out;
}

/// Q1 diffusion operator -div(a grad u) with homogeneous Dirichlet
/// conditions: K_l weighted by the KL coefficient functions, mass matrix M and
/// its Cholesky factor.
struct DiffusionProblem {
  int n_c = 0;
  ScalarSpace space;
  std::vector<SparseMatrix> K;
  SparseMatrix M;
  Cholesky chol;

  [[nodiscard]] Eigen::Index n_x() const { return space.size(); }
  [[nodiscard]] int m() const { return static_cast<int>(K.size()) - 1; }
  [[nodiscard]] SparseMatrix K_at(const Eigen::VectorXd& xi) const { return combine(K, xi); }

  static Eigen::Index size_for(int n_c) {
    const Eigen::Index n = (Eigen::Index{1} << n_c) - 1;
    return n * n;
  }
};

inline DiffusionProblem assemble_diffusion(int n_c, const randfield::KLExpansion& kl) {
  if (n_c < 1) throw ConfigError("diffusion grid level must be >= 1");
  kl.require_positive(element_quadrature_points(n_c));
  DiffusionProblem p;
  p.n_c = n_c;
  p.space = ScalarSpace::q1_interior(n_c);
  p.K = assemble_stiffness_stack(p.space, kl);
  p.M = assemble_mass(p.space);
  p.chol = Cholesky(p.M);
  return p;
}

/// Q2-Q1 Taylor-Hood Stokes operator on the channel: vector Laplacian blocks
/// K_l (velocity ordered as all x_1 components, then all x_2 components),
/// divergence B (n_p x n_u), pressure mass M_p and its Cholesky factor.
struct StokesProblem {
  int n_c = 0;
  ScalarSpace vel;
  ScalarSpace pres;
  std::vector<SparseMatrix> K;
  SparseMatrix B;
  SparseMatrix Mp;
  Cholesky chol;

  [[nodiscard]] Eigen::Index n_u() const { return 2 * vel.size(); }
  [[nodiscard]] Eigen::Index n_p() const { return pres.size(); }
  [[nodiscard]] Eigen::Index n_x() const { return n_u() + n_p(); }
  [[nodiscard]] int m() const { return static_cast<int>(K.size()) - 1; }
  [[nodiscard]] SparseMatrix K_at(const Eigen::VectorXd& xi) const { return combine(K, xi); }

  /// (n_u, n_p) without assembling.
  static std::pair<Eigen::Index, Eigen::Index> sizes_for(int n_c) {
    const Eigen::Index N = Eigen::Index{1} << n_c;
    return {2 * (2 * N) * (2 * N - 1), (N + 1) * (N + 1)};
  }
};

inline StokesProblem assemble_stokes(int n_c, const randfield::KLExpansion& kl) {
  if (n_c < 1) throw ConfigError("Stokes grid level must be >= 1");
  kl.require_positive(element_quadrature_points(n_c));
  StokesProblem p;
  p.n_c = n_c;
  p.vel = ScalarSpace::q2_channel(n_c);
  p.pres = ScalarSpace::q1_all(n_c);
  for (const auto& Ks : assemble_stiffness_stack(p.vel, kl)) p.K.push_back(block_diag2(Ks));
  const auto [D1, D2] = assemble_divergence(p.vel, p.pres);
  std::vector<Eigen::Triplet<double>> t;
  for (int k = 0; k < D1.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(D1, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
    for (SparseMatrix::InnerIterator it(D2, k); it; ++it) t.emplace_back(it.row(), it.col() + D1.cols(), it.value());
  }
  p.B.resize(p.pres.size(), 2 * p.vel.size());
  p.B.setFromTriplets(t.begin(), t.end());
  p.B.prune(0.0);
  p.Mp = assemble_mass(p.pres);
  p.chol = Cholesky(p.Mp);
  return p;
}

/// One level of a geometric hierarchy: re-assembled K_l and the prolongation
/// from the next coarser level (empty on the coarsest level).
struct GridLevel {
  int n_c = 0;
  std::vector<SparseMatrix> K;
  SparseMatrix P;
};

/// Levels ordered coarsest first; the last level is the fine problem.
struct GridHierarchy {
  std::vector<GridLevel> levels;

  [[nodiscard]] std::size_t size() const { return levels.size(); }
  [[nodiscard]] const GridLevel& finest() const { return levels.back(); }
};

namespace detail {

template <class SpaceFor>
GridHierarchy build_hierarchy(int n_c, int n_c0, const std::vector<SparseMatrix>& fine_K,
                              const randfield::KLExpansion& kl, SpaceFor space_for, bool vector_valued) {
  if (!(n_c > n_c0 && n_c0 >= 1)) throw ConfigError("hierarchy needs n_c > n_c0 >= 1");
  GridHierarchy h;
  for (int level = n_c0; level <= n_c; ++level) {
    GridLevel g;
    g.n_c = level;
    const ScalarSpace s = space_for(level);
    if (level == n_c) {
      g.K = fine_K;
    } else {
      for (const auto& Ks : assemble_stiffness_stack(s, kl)) g.K.push_back(vector_valued ? block_diag2(Ks) : Ks);
    }
    if (level > n_c0) {
      const SparseMatrix P = prolongation(space_for(level - 1), s);
      g.P = vector_valued ? block_diag2(P) : P;
    }
    h.levels.push_back(std::move(g));
  }
  return h;
}

}  // namespace detail

inline GridHierarchy build_hierarchy(const DiffusionProblem& p, int n_c0, const randfield::KLExpansion& kl) {
  return detail::build_hierarchy(p.n_c, n_c0, p.K, kl, ScalarSpace::q1_interior, false);
}

/// Velocity hierarchy for the Stokes problem (geometric V-cycle option of the
/// mean-based preconditioner).
inline GridHierarchy build_hierarchy(const StokesProblem& p, int n_c0, const randfield::KLExpansion& kl) {
  return detail::build_hierarchy(p.n_c, n_c0, p.K, kl, ScalarSpace::q2_channel, true);
}

}  // namespace sglr::discretize
