#pragma once

#include "sglr/errors.hpp"
#include "sglr/lowrank/factored_matrix.hpp"

#include <Eigen/Sparse>

#include <vector>

namespace sglr {

using SparseMatrix = Eigen::SparseMatrix<double>;

}  // namespace sglr

namespace sglr::lowrank {

/// One Kronecker term G (x) A of the operator X -> sum_l A_l X G_l^T.
struct OperatorTerm {
  SparseMatrix G;  // n_xi x n_xi
  SparseMatrix A;  // n_x x n_x
};

/// Ordered Kronecker-sum operator; term 0 carries G_0 = I.
class OperatorStack {
 public:
  OperatorStack() = default;

  explicit OperatorStack(std::vector<OperatorTerm> terms) : terms_(std::move(terms)) {
    if (terms_.empty()) throw DimensionError("OperatorStack: no terms");
    const auto nxi = terms_.front().G.rows();
    const auto nx = terms_.front().A.rows();
    for (const auto& t : terms_) {
      if (t.G.rows() != nxi || t.G.cols() != nxi || t.A.rows() != nx || t.A.cols() != nx) {
        throw DimensionError("OperatorStack: inconsistent term dimensions");
      }
    }
  }

  [[nodiscard]] const std::vector<OperatorTerm>& terms() const { return terms_; }
  [[nodiscard]] std::size_t size() const { return terms_.size(); }
  [[nodiscard]] Eigen::Index spatial_size() const { return terms_.front().A.rows(); }
  [[nodiscard]] Eigen::Index chaos_size() const { return terms_.front().G.rows(); }
  [[nodiscard]] const SparseMatrix& mean() const { return terms_.front().A; }

  /// Same chaos matrices with different spatial matrices (coarse levels).
  [[nodiscard]] OperatorStack with_spatial(const std::vector<SparseMatrix>& A) const {
    if (A.size() != terms_.size()) throw DimensionError("with_spatial: term count mismatch");
    std::vector<OperatorTerm> t;
    t.reserve(A.size());
    for (std::size_t l = 0; l < A.size(); ++l) t.push_back({terms_[l].G, A[l]});
    return OperatorStack(std::move(t));
  }

  /// Assembled sum_l G_l (x) A_l acting on column-major vec(X).
  [[nodiscard]] SparseMatrix kronecker_sum() const {
    const Eigen::Index nx = spatial_size();
    const Eigen::Index nxi = chaos_size();
    std::vector<Eigen::Triplet<double>> trip;
    for (const auto& t : terms_) {
      for (int gk = 0; gk < t.G.outerSize(); ++gk) {
        for (SparseMatrix::InnerIterator g(t.G, gk); g; ++g) {
          for (int ak = 0; ak < t.A.outerSize(); ++ak) {
            for (SparseMatrix::InnerIterator a(t.A, ak); a; ++a) {
              trip.emplace_back(g.row() * nx + a.row(), g.col() * nx + a.col(), g.value() * a.value());
            }
          }
        }
      }
    }
    SparseMatrix out(nx * nxi, nx * nxi);
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
  }

 private:
  std::vector<OperatorTerm> terms_;
};

/// sum_l (A_l Y)(G_l Z)^T by concatenation; rank grows to (m+1) k.
inline FactoredMatrix apply_operator(const OperatorStack& ops, const FactoredMatrix& X) {
  if (X.rows() != ops.spatial_size() || X.cols() != ops.chaos_size()) {
    throw DimensionError("apply_operator: dimension mismatch");
  }
  const Eigen::Index k = X.rank();
  const auto nt = static_cast<Eigen::Index>(ops.size());
  Eigen::MatrixXd Y(X.rows(), nt * k);
  Eigen::MatrixXd Z(X.cols(), nt * k);
  if (k == 0) return {std::move(Y), std::move(Z)};
  for (Eigen::Index l = 0; l < nt; ++l) {
    const auto& t = ops.terms()[static_cast<std::size_t>(l)];
    Y.middleCols(l * k, k).noalias() = t.A * X.Y();
    Z.middleCols(l * k, k).noalias() = t.G * X.Z();
  }
  return {std::move(Y), std::move(Z)};
}

}  // namespace sglr::lowrank
