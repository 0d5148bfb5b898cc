#pragma once

// Uniform vocabulary over the two coefficient representations the solvers
// run on: FactoredMatrix (low-rank, truncated) and DenseCoefficients
// (full-rank, exact). Solver templates only use the free functions below.

#include "sglr/lowrank/factored_matrix.hpp"
#include "sglr/lowrank/operator_stack.hpp"

#include <concepts>
#include <initializer_list>

namespace sglr::lowrank {

/// Full n_x x n_xi coefficient matrix; truncation is the identity.
struct DenseCoefficients {
  Eigen::MatrixXd X;

  [[nodiscard]] Eigen::Index rows() const { return X.rows(); }
  [[nodiscard]] Eigen::Index cols() const { return X.cols(); }
  [[nodiscard]] Eigen::Index rank() const { return std::min(X.rows(), X.cols()); }
};

inline DenseCoefficients lincomb(std::initializer_list<std::pair<double, const DenseCoefficients*>> terms) {
  if (terms.size() == 0) throw DimensionError("lincomb: no terms");
  const auto& first = *terms.begin()->second;
  DenseCoefficients out{Eigen::MatrixXd::Zero(first.rows(), first.cols())};
  for (const auto& [c, X] : terms) {
    if (X->rows() != first.rows() || X->cols() != first.cols()) {
      throw DimensionError("lincomb: dimension mismatch");
    }
    if (c != 0.0) out.X.noalias() += c * X->X;
  }
  return out;
}

inline DenseCoefficients scaled(const DenseCoefficients& X, double c) { return {c * X.X}; }

inline double inner(const DenseCoefficients& a, const DenseCoefficients& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("inner: dimension mismatch");
  return (a.X.array() * b.X.array()).sum();
}

inline double frobenius_norm(const DenseCoefficients& X) { return X.X.norm(); }
inline double stable_norm(const DenseCoefficients& X) { return X.X.norm(); }

inline Eigen::MatrixXd to_dense(const DenseCoefficients& X) { return X.X; }

inline DenseCoefficients truncate(const DenseCoefficients& X, const TruncationSpec&) { return X; }

inline DenseCoefficients apply_operator(const OperatorStack& ops, const DenseCoefficients& X) {
  if (X.rows() != ops.spatial_size() || X.cols() != ops.chaos_size()) {
    throw DimensionError("apply_operator: dimension mismatch");
  }
  DenseCoefficients out{Eigen::MatrixXd::Zero(X.rows(), X.cols())};
  Eigen::MatrixXd AX;
  for (const auto& t : ops.terms()) {
    AX.noalias() = t.A * X.X;
    out.X.noalias() += AX * t.G.transpose();
  }
  return out;
}

template <class F>
DenseCoefficients map_rows(const DenseCoefficients& X, F&& f) {
  Eigen::MatrixXd Y = f(X.X);
  if (Y.cols() != X.cols()) throw DimensionError("map_rows: map changed column count");
  return {std::move(Y)};
}

/// Representation traits: zero construction and conversion from dense.
template <class T>
struct Coefficients;

template <>
struct Coefficients<FactoredMatrix> {
  static FactoredMatrix zero(Eigen::Index rows, Eigen::Index cols) { return {rows, cols}; }
  static FactoredMatrix from_dense(const Eigen::MatrixXd& D, const TruncationSpec& spec) {
    return lowrank::from_dense(D, spec);
  }
  static FactoredMatrix to_factored(const FactoredMatrix& X) { return X; }
  static FactoredMatrix from_factored(const FactoredMatrix& X) { return X; }
  static constexpr bool low_rank = true;
};

template <>
struct Coefficients<DenseCoefficients> {
  static DenseCoefficients zero(Eigen::Index rows, Eigen::Index cols) {
    return {Eigen::MatrixXd::Zero(rows, cols)};
  }
  static DenseCoefficients from_dense(const Eigen::MatrixXd& D, const TruncationSpec&) { return {D}; }
  static FactoredMatrix to_factored(const DenseCoefficients& X) {
    return {X.X, Eigen::MatrixXd::Identity(X.cols(), X.cols())};
  }
  static DenseCoefficients from_factored(const FactoredMatrix& X) { return {to_dense(X)}; }
  static constexpr bool low_rank = false;
};

/// Operations every solver template relies on.
template <class T>
concept CoefficientMatrix = requires(const T& a, const T& b, const OperatorStack& ops,
                                     const TruncationSpec& spec) {
  { a.rows() } -> std::convertible_to<Eigen::Index>;
  { a.cols() } -> std::convertible_to<Eigen::Index>;
  { a.rank() } -> std::convertible_to<Eigen::Index>;
  { inner(a, b) } -> std::convertible_to<double>;
  { truncate(a, spec) } -> std::same_as<T>;
  { apply_operator(ops, a) } -> std::same_as<T>;
  { scaled(a, 1.0) } -> std::same_as<T>;
  { Coefficients<T>::zero(Eigen::Index{1}, Eigen::Index{1}) } -> std::same_as<T>;
};

/// a X + b Y and a X + b Y + c Z without truncation.
template <class T>
T combine(double a, const T& X, double b, const T& Y) {
  return lincomb({{a, &X}, {b, &Y}});
}
template <class T>
T combine(double a, const T& X, double b, const T& Y, double c, const T& Z) {
  return lincomb({{a, &X}, {b, &Y}, {c, &Z}});
}

static_assert(CoefficientMatrix<FactoredMatrix>);
static_assert(CoefficientMatrix<DenseCoefficients>);

}  // namespace sglr::lowrank
