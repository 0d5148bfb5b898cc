#pragma once

#include "sglr/errors.hpp"
#include "sglr/lowrank/coefficient_space.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace sglr::solvers {

using lowrank::Coefficients;
using lowrank::DenseCoefficients;
using lowrank::FactoredMatrix;
using lowrank::OperatorStack;
using lowrank::TruncationSpec;

/// One line of a convergence trace.
struct TraceRecord {
  int iteration = 0;
  double residual = 0.0;  // relative
  Eigen::Index rank = 0;
};

struct SolveStats {
  std::vector<TraceRecord> trace;
  int iterations = 0;
  bool converged = false;
  double relative_residual = 0.0;  // final, as tested for convergence
  double true_residual = -1.0;     // recomputed ||F - A X|| / ||F|| where available
  Eigen::Index max_rank = 0;
};

template <class T>
struct SolveResult {
  T X;
  SolveStats stats;
};

/// Velocity/pressure pair of coefficient matrices sharing the chaos dimension.
template <class T>
struct Block2 {
  T u;
  T p;

  [[nodiscard]] Eigen::Index rows() const { return u.rows() + p.rows(); }
  [[nodiscard]] Eigen::Index cols() const { return u.cols(); }
  [[nodiscard]] Eigen::Index rank() const { return std::max(u.rank(), p.rank()); }
};

template <class T>
Block2<T> combine(double a, const Block2<T>& X, double b, const Block2<T>& Y) {
  return {lowrank::combine(a, X.u, b, Y.u), lowrank::combine(a, X.p, b, Y.p)};
}
template <class T>
Block2<T> combine(double a, const Block2<T>& X, double b, const Block2<T>& Y, double c, const Block2<T>& Z) {
  return {lowrank::combine(a, X.u, b, Y.u, c, Z.u), lowrank::combine(a, X.p, b, Y.p, c, Z.p)};
}
template <class T>
Block2<T> scaled(const Block2<T>& X, double c) {
  return {scaled(X.u, c), scaled(X.p, c)};
}
template <class T>
double inner(const Block2<T>& a, const Block2<T>& b) {
  return inner(a.u, b.u) + inner(a.p, b.p);
}
template <class T>
Block2<T> truncate(const Block2<T>& X, const TruncationSpec& spec) {
  return {truncate(X.u, spec), truncate(X.p, spec)};
}
template <class T>
double frobenius_norm(const Block2<T>& X) {
  return std::sqrt(std::max(0.0, inner(X, X)));
}

template <class T>
double stable_norm(const Block2<T>& X) {
  return std::hypot(stable_norm(X.u), stable_norm(X.p));
}

using lowrank::combine;

inline void require(bool ok, const char* msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace sglr::solvers
