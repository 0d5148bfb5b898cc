#pragma once

#include "sglr/iteration/adapters.hpp"
#include "sglr/iteration/quadrature_ops.hpp"
#include "sglr/iteration/rayleigh.hpp"
#include "sglr/iteration/schedule.hpp"

#include <chrono>
#include <cmath>
#include <optional>
#include <vector>

namespace sglr::iteration {

struct IterationConfig {
  int n_e = 1;
  double tol_isi = 1e-5;
  int max_iterations = 50;
  std::optional<double> fixed_inner_tol;  // overrides the adaptive schedule
  double eps_abs = 1e-8;                  // after Gram-Schmidt and the Rayleigh matvec
  Eigen::MatrixXd diagnostic_points;      // m x k; per-iteration diagnostics when k > 0

  void validate() const {
    if (n_e < 1) throw ConfigError("n_e must be >= 1");
    if (!(tol_isi > 0.0)) throw ConfigError("tol_isi must be positive");
    if (max_iterations < 1) throw ConfigError("max iterations must be >= 1");
    if (fixed_inner_tol && !(*fixed_inner_tol > 0.0)) throw ConfigError("inner tolerance must be positive");
    if (eps_abs < 0.0) throw ConfigError("eps_abs must be >= 0");
  }
};

struct IterationRecord {
  int iteration = 0;
  double eps_theta = 0.0;
  InnerTolerances inner;
  std::vector<Eigen::Index> solve_ranks;  // right after the inner solve
  std::vector<Eigen::Index> ranks;        // after orthonormalization
  std::vector<int> inner_iterations;
  std::vector<double> inner_residuals;
  std::vector<bool> inner_converged;
  std::vector<std::vector<solvers::TraceRecord>> inner_traces;
  std::vector<double> residual;   // report-only, empty unless requested
  std::vector<double> coef_diff;
  double seconds = 0.0;
};

template <class T>
struct EigenSolution {
  std::vector<T> U;                   // transformed eigenvector expansions
  std::vector<Eigen::VectorXd> lambda;  // gPC coefficients of lambda^s
  RitzCoefficients ritz;
  MeanEigen mean;
  std::vector<IterationRecord> history;
  bool converged = false;
  double rayleigh_seconds = 0.0;

  [[nodiscard]] int iterations() const { return static_cast<int>(history.size()); }
  [[nodiscard]] std::size_t n_e() const { return U.size(); }
};

template <class T>
std::vector<T> orthonormalize(const std::vector<T>& V, const QuadratureContext& q, double eps_abs) {
  if (V.size() == 1) return {normalize(V.front(), q)};
  return gram_schmidt(V, q, TruncationSpec::absolute(eps_abs));
}

/// Rayleigh quotients lambda^s and the Rayleigh-Ritz matrix T(xi) for a
/// converged set.
template <class T, class Adapter>
void finish_rayleigh(EigenSolution<T>& sol, const Adapter& a, const chaos::ChaosBasis& basis, double eps_abs) {
  std::vector<T> left;
  std::vector<T> right;
  for (const auto& u : sol.U) {
    auto [l, r] = a.rayleigh_pair(u, eps_abs);
    left.push_back(std::move(l));
    right.push_back(std::move(r));
  }
  sol.ritz = ritz_coefficients(left, right, basis);
  sol.lambda.clear();
  for (std::size_t s = 0; s < sol.U.size(); ++s) sol.lambda.push_back(sol.ritz.T[s][s]);
}

/// Sampled eigenvector block [u^1(xi) .. u^{n_e}(xi)] in the transformed
/// variable.
template <class T>
Eigen::MatrixXd sample_vectors(const std::vector<T>& U, const Eigen::VectorXd& psi) {
  Eigen::MatrixXd out(U.front().rows(), static_cast<Eigen::Index>(U.size()));
  for (std::size_t s = 0; s < U.size(); ++s) {
    const FactoredMatrix f = Coefficients<T>::to_factored(U[s]);
    out.col(static_cast<Eigen::Index>(s)) =
        f.rank() == 0 ? Eigen::VectorXd::Zero(f.rows()) : Eigen::VectorXd(f.Y() * (f.Z().transpose() * psi));
  }
  return out;
}

struct Diagnostics {
  std::vector<double> residual;    // mean ||A u^s - lambda^s u^s|| over the points
  std::vector<double> coef_diff;   // relative gPC coefficient difference
};

/// Report-only indicators: the pointwise eigen-residual averaged over the
/// given points and the mean relative change of the gPC coefficients. With
/// no lambda expansions the pointwise Rayleigh quotient stands in for
/// lambda^s(xi).
template <class T, class Adapter>
Diagnostics diagnostics(const std::vector<T>& U, const std::vector<Eigen::VectorXd>& lambda,
                        const std::vector<T>& U_prev, const Adapter& a, const chaos::ChaosBasis& basis,
                        const Eigen::MatrixXd& points) {
  Diagnostics d;
  const std::size_t ne = U.size();
  d.residual.assign(ne, 0.0);
  if (points.cols() > 0) {
    for (Eigen::Index k = 0; k < points.cols(); ++k) {
      const Eigen::VectorXd psi = basis.eval(points.col(k));
      const Eigen::MatrixXd W = sample_vectors(U, psi);
      const Eigen::MatrixXd AW = a.apply_sample(points.col(k), W);
      for (std::size_t s = 0; s < ne; ++s) {
        const auto c = static_cast<Eigen::Index>(s);
        const double l = lambda.empty() ? W.col(c).dot(AW.col(c)) / W.col(c).squaredNorm() : lambda[s].dot(psi);
        d.residual[s] += (AW.col(c) - l * W.col(c)).norm() / static_cast<double>(points.cols());
      }
    }
  }
  for (std::size_t s = 0; s < ne; ++s) {
    const Eigen::MatrixXd cur = lowrank::to_dense(Coefficients<T>::to_factored(U[s]));
    const Eigen::MatrixXd prev = lowrank::to_dense(Coefficients<T>::to_factored(U_prev[s]));
    double acc = 0.0;
    for (Eigen::Index k = 0; k < cur.cols(); ++k) {
      const double np = prev.col(k).norm();
      if (np > 0.0) acc += (cur.col(k) - prev.col(k)).norm() / np;
    }
    d.coef_diff.push_back(acc / static_cast<double>(cur.cols()));
  }
  return d;
}

/// Stochastic inverse subspace iteration.
template <class T, class Adapter>
EigenSolution<T> isi_run(const Adapter& a, const chaos::ChaosBasis& basis, const QuadratureContext& q,
                         const IterationConfig& cfg) {
  cfg.validate();
  using clock = std::chrono::steady_clock;
  EigenSolution<T> sol;
  sol.mean = a.mean_eigen(cfg.n_e);
  sol.U = rank_one_iterates<T>(sol.mean.vectors, basis.size());

  double eps_prev = 1.0;
  for (int i = 1; i <= cfg.max_iterations; ++i) {
    const auto t0 = clock::now();
    IterationRecord rec;
    rec.iteration = i;
    rec.inner = tolerance_schedule(eps_prev, Adapter::kind, cfg.fixed_inner_tol);
    std::vector<T> V;
    for (const auto& u : sol.U) {
      auto r = a.solve(u, rec.inner);
      rec.solve_ranks.push_back(r.V.rank());
      rec.inner_iterations.push_back(r.stats.iterations);
      rec.inner_residuals.push_back(r.stats.relative_residual);
      rec.inner_converged.push_back(r.stats.converged);
      rec.inner_traces.push_back(std::move(r.stats.trace));
      V.push_back(std::move(r.V));
    }
    std::vector<T> U = orthonormalize(V, q, cfg.eps_abs);
    rec.eps_theta = subspace_angle(U, sol.U, q);
    for (const auto& u : U) rec.ranks.push_back(u.rank());
    rec.seconds = std::chrono::duration<double>(clock::now() - t0).count();
    if (cfg.diagnostic_points.cols() > 0) {
      Diagnostics d = diagnostics(U, {}, sol.U, a, basis, cfg.diagnostic_points);
      rec.residual = std::move(d.residual);
      rec.coef_diff = std::move(d.coef_diff);
    }
    sol.U = std::move(U);
    // Smolyak weights can be negative, so the quadrature estimate of E[theta]
    // is only meaningful in magnitude.
    eps_prev = std::abs(rec.eps_theta);
    sol.history.push_back(std::move(rec));
    if (eps_prev <= cfg.tol_isi) {
      sol.converged = true;
      break;
    }
  }
  const auto t1 = clock::now();
  finish_rayleigh(sol, a, basis, cfg.eps_abs);
  sol.rayleigh_seconds = std::chrono::duration<double>(clock::now() - t1).count();
  return sol;
}

}  // namespace sglr::iteration
