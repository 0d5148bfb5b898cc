#pragma once

#include "sglr/errors.hpp"
#include "sglr/lowrank/jacobi_svd.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <optional>
#include <string>
#include <utility>

namespace sglr::lowrank {

/// Rank-k product X = Y Z^T of an n_rows x n_cols coefficient matrix.
///
/// Columns of X are gPC coefficient vectors, so n_rows is the spatial size and
/// n_cols the chaos basis size. A rank-0 value encodes the zero matrix and
/// keeps its outer dimensions. Two values are equal when their
/// reconstructions are; factors are never canonical.
class FactoredMatrix {
 public:
  FactoredMatrix() = default;

  FactoredMatrix(Eigen::Index rows, Eigen::Index cols)
      : Y_(rows, 0), Z_(cols, 0) {}

  FactoredMatrix(Eigen::MatrixXd Y, Eigen::MatrixXd Z) : Y_(std::move(Y)), Z_(std::move(Z)) {
    if (Y_.cols() != Z_.cols()) {
      throw DimensionError("FactoredMatrix: factor ranks differ");
    }
  }

  static FactoredMatrix outer(const Eigen::VectorXd& y, const Eigen::VectorXd& z) {
    return {Eigen::MatrixXd(y), Eigen::MatrixXd(z)};
  }

  [[nodiscard]] Eigen::Index rows() const { return Y_.rows(); }
  [[nodiscard]] Eigen::Index cols() const { return Z_.rows(); }
  [[nodiscard]] Eigen::Index rank() const { return Y_.cols(); }
  [[nodiscard]] const Eigen::MatrixXd& Y() const { return Y_; }
  [[nodiscard]] const Eigen::MatrixXd& Z() const { return Z_; }

 private:
  Eigen::MatrixXd Y_;
  Eigen::MatrixXd Z_;
};

enum class TruncationMode { relative, absolute };

/// Singular-value dropping rule for truncate().
struct TruncationSpec {
  TruncationMode mode = TruncationMode::relative;
  double tolerance = 0.0;
  std::optional<Eigen::Index> rank_cap;

  static TruncationSpec relative(double eps, std::optional<Eigen::Index> cap = std::nullopt) {
    return {TruncationMode::relative, eps, cap};
  }
  static TruncationSpec absolute(double eps, std::optional<Eigen::Index> cap = std::nullopt) {
    return {TruncationMode::absolute, eps, cap};
  }
};

inline void require_same_shape(const FactoredMatrix& a, const FactoredMatrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(what) + ": dimension mismatch");
  }
}

/// Number of singular values kept by `spec`; `s` is sorted descending.
inline Eigen::Index retained_rank(const Eigen::VectorXd& s, const TruncationSpec& spec) {
  const Eigen::Index n = s.size();
  Eigen::Index keep = 0;
  if (spec.mode == TruncationMode::absolute) {
    while (keep < n && s(keep) >= spec.tolerance) ++keep;
  } else {
    const double total = s.squaredNorm();
    const double budget = spec.tolerance * spec.tolerance * total;
    // Smallest k whose discarded tail energy fits the budget.
    double tail = 0.0;
    keep = n;
    for (Eigen::Index k = n; k > 0; --k) {
      const double next = tail + s(k - 1) * s(k - 1);
      if (next > budget) break;
      tail = next;
      keep = k - 1;
    }
  }
  if (spec.rank_cap) keep = std::min(keep, *spec.rank_cap);
  return keep;
}

/// SVD-based rank compression through QR of both factors and an SVD of the
/// small core R_Y R_Z^T.
inline FactoredMatrix truncate(const FactoredMatrix& X, const TruncationSpec& spec) {
  const Eigen::Index K = X.rank();
  if (K == 0) return X;
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();

  Eigen::HouseholderQR<Eigen::MatrixXd> qy(X.Y());
  Eigen::HouseholderQR<Eigen::MatrixXd> qz(X.Z());
  const Eigen::Index ry = std::min(n, K);
  const Eigen::Index rz = std::min(p, K);
  const Eigen::MatrixXd Ry = qy.matrixQR().topRows(ry).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd Rz = qz.matrixQR().topRows(rz).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd core = Ry * Rz.transpose();

  const SvdResult svd = jacobi_svd(core);
  const Eigen::Index k = retained_rank(svd.s, spec);
  if (k == 0) return FactoredMatrix(n, p);

  Eigen::MatrixXd Ynew = Eigen::MatrixXd::Zero(n, k);
  Ynew.topRows(ry) = svd.U.leftCols(k);
  Ynew.applyOnTheLeft(qy.householderQ());
  Eigen::MatrixXd Znew = Eigen::MatrixXd::Zero(p, k);
  Znew.topRows(rz) = svd.V.leftCols(k) * svd.s.head(k).asDiagonal();
  Znew.applyOnTheLeft(qz.householderQ());
  return {std::move(Ynew), std::move(Znew)};
}

/// Singular values of X (descending), computed from the factors.
inline Eigen::VectorXd singular_values(const FactoredMatrix& X) {
  if (X.rank() == 0) return Eigen::VectorXd(0);
  Eigen::HouseholderQR<Eigen::MatrixXd> qy(X.Y());
  Eigen::HouseholderQR<Eigen::MatrixXd> qz(X.Z());
  const Eigen::Index ry = std::min(X.rows(), X.rank());
  const Eigen::Index rz = std::min(X.cols(), X.rank());
  const Eigen::MatrixXd Ry = qy.matrixQR().topRows(ry).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd Rz = qz.matrixQR().topRows(rz).triangularView<Eigen::Upper>();
  return jacobi_svd(Ry * Rz.transpose()).s;
}

/// Exact linear combination sum_i c_i X_i by factor concatenation.
inline FactoredMatrix lincomb(std::initializer_list<std::pair<double, const FactoredMatrix*>> terms) {
  if (terms.size() == 0) throw DimensionError("lincomb: no terms");
  const FactoredMatrix& first = *terms.begin()->second;
  Eigen::Index K = 0;
  for (const auto& [c, X] : terms) {
    require_same_shape(first, *X, "lincomb");
    if (c != 0.0) K += X->rank();
  }
  Eigen::MatrixXd Y(first.rows(), K);
  Eigen::MatrixXd Z(first.cols(), K);
  Eigen::Index off = 0;
  for (const auto& [c, X] : terms) {
    if (c == 0.0 || X->rank() == 0) continue;
    Y.middleCols(off, X->rank()) = X->Y();
    Z.middleCols(off, X->rank()) = c * X->Z();
    off += X->rank();
  }
  return {std::move(Y), std::move(Z)};
}

inline FactoredMatrix add(const FactoredMatrix& a, const FactoredMatrix& b) {
  return lincomb({{1.0, &a}, {1.0, &b}});
}

inline FactoredMatrix scaled(const FactoredMatrix& X, double c) {
  return {X.Y(), c * X.Z()};
}

/// trace(X1^T X2) = trace((Z2^T Z1)(Y1^T Y2)).
inline double inner(const FactoredMatrix& a, const FactoredMatrix& b) {
  require_same_shape(a, b, "inner");
  if (a.rank() == 0 || b.rank() == 0) return 0.0;
  const Eigen::MatrixXd zz = b.Z().transpose() * a.Z();
  const Eigen::MatrixXd yy = a.Y().transpose() * b.Y();
  return (zz.array() * yy.transpose().array()).sum();
}

inline double frobenius_norm(const FactoredMatrix& X) {
  return std::sqrt(std::max(0.0, inner(X, X)));
}

/// Frobenius norm through the QR-reduced core. Unlike frobenius_norm() it
/// does not square the value first, so residuals far below the scale of the
/// factors stay measurable.
inline double stable_norm(const FactoredMatrix& X) {
  if (X.rank() == 0) return 0.0;
  Eigen::HouseholderQR<Eigen::MatrixXd> qy(X.Y());
  Eigen::HouseholderQR<Eigen::MatrixXd> qz(X.Z());
  const Eigen::Index ry = std::min(X.rows(), X.rank());
  const Eigen::Index rz = std::min(X.cols(), X.rank());
  const Eigen::MatrixXd Ry = qy.matrixQR().topRows(ry).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd Rz = qz.matrixQR().topRows(rz).triangularView<Eigen::Upper>();
  return (Ry * Rz.transpose()).norm();
}

inline Eigen::MatrixXd to_dense(const FactoredMatrix& X) {
  if (X.rank() == 0) return Eigen::MatrixXd::Zero(X.rows(), X.cols());
  return X.Y() * X.Z().transpose();
}

inline FactoredMatrix from_dense(const Eigen::MatrixXd& D, const TruncationSpec& spec) {
  const bool wide = D.cols() > D.rows();
  // Seed with the identity on the smaller side; truncate() does the rest.
  FactoredMatrix seed = wide
      ? FactoredMatrix(Eigen::MatrixXd::Identity(D.rows(), D.rows()), D.transpose())
      : FactoredMatrix(D, Eigen::MatrixXd::Identity(D.cols(), D.cols()));
  return truncate(seed, spec);
}

/// Applies a column-wise linear map to the left factor: f(X) = (f(Y)) Z^T.
template <class F>
FactoredMatrix map_rows(const FactoredMatrix& X, F&& f) {
  Eigen::MatrixXd Y = f(X.Y());
  if (Y.cols() != X.rank()) throw DimensionError("map_rows: map changed column count");
  return {std::move(Y), X.Z()};
}

}  // namespace sglr::lowrank
