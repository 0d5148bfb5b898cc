#pragma once

#include "sglr/iteration/isi.hpp"
#include "sglr/parallel.hpp"
#include "sglr/reference/monte_carlo.hpp"

#include <cmath>
#include <vector>

namespace sglr::reference {

/// Evaluates the gPC surrogate at xi: lambda^s(xi) and the physical
/// eigenvectors, optionally refined by Rayleigh-Ritz on span{u^s(xi)}.
template <class T, class Adapter>
SampleEigen sg_sample(const iteration::EigenSolution<T>& sol, const Adapter& a, const chaos::ChaosBasis& basis,
                      const Eigen::VectorXd& xi, bool use_rr) {
  const Eigen::VectorXd psi = basis.eval(xi);
  Eigen::MatrixXd W = iteration::sample_vectors(sol.U, psi);
  SampleEigen out;
  if (use_rr) {
    iteration::RitzSample rs = iteration::rayleigh_ritz_sample(sol.ritz, psi, W);
    out.values = std::move(rs.values);
    W = std::move(rs.vectors);
  } else {
    out.values.resize(static_cast<Eigen::Index>(sol.lambda.size()));
    for (std::size_t s = 0; s < sol.lambda.size(); ++s) out.values(static_cast<Eigen::Index>(s)) = sol.lambda[s].dot(psi);
  }
  out.vectors = a.physical(W);
  return out;
}

template <class T, class Adapter>
std::vector<SampleEigen> sg_samples(const iteration::EigenSolution<T>& sol, const Adapter& a,
                                    const chaos::ChaosBasis& basis, const Eigen::MatrixXd& points, bool use_rr,
                                    unsigned threads = 0) {
  std::vector<SampleEigen> out(static_cast<std::size_t>(points.cols()));
  parallel_for(out.size(), threads, [&](std::size_t r) {
    out[r] = sg_sample(sol, a, basis, points.col(static_cast<Eigen::Index>(r)), use_rr);
  });
  return out;
}

/// Flips `u` so that <u, ref> >= 0.
inline Eigen::VectorXd align_sign(const Eigen::VectorXd& u, const Eigen::VectorXd& ref) {
  return u.dot(ref) < 0.0 ? Eigen::VectorXd(-u) : u;
}

struct ErrorReport {
  std::vector<double> eps_lambda;
  std::vector<double> eps_u;
  std::size_t n_r = 0;
  bool rayleigh_ritz = false;
  double t_solve = 0.0;
  double t_sample = 0.0;
  double t_mc = 0.0;
};

/// Mean relative eigenvalue and eigenvector errors over the samples, with
/// eigenvector signs aligned to the reference per sample.
inline ErrorReport compare(const std::vector<SampleEigen>& sg, const std::vector<SampleEigen>& mc) {
  if (sg.size() != mc.size() || sg.empty()) throw DimensionError("compare: sample counts differ or are zero");
  const Eigen::Index ne = sg.front().values.size();
  ErrorReport rep;
  rep.n_r = sg.size();
  rep.eps_lambda.assign(static_cast<std::size_t>(ne), 0.0);
  rep.eps_u.assign(static_cast<std::size_t>(ne), 0.0);
  for (std::size_t r = 0; r < sg.size(); ++r) {
    if (mc[r].values.size() < ne || sg[r].vectors.rows() != mc[r].vectors.rows()) {
      throw DimensionError("compare: reference sample has the wrong shape");
    }
    for (Eigen::Index s = 0; s < ne; ++s) {
      const auto k = static_cast<std::size_t>(s);
      const double lm = mc[r].values(s);
      rep.eps_lambda[k] += std::abs(sg[r].values(s) - lm) / std::abs(lm);
      const Eigen::VectorXd um = mc[r].vectors.col(s);
      const Eigen::VectorXd us = align_sign(sg[r].vectors.col(s), um);
      rep.eps_u[k] += (us - um).norm() / um.norm();
    }
  }
  for (Eigen::Index s = 0; s < ne; ++s) {
    rep.eps_lambda[static_cast<std::size_t>(s)] /= static_cast<double>(sg.size());
    rep.eps_u[static_cast<std::size_t>(s)] /= static_cast<double>(sg.size());
  }
  return rep;
}

}  // namespace sglr::reference
