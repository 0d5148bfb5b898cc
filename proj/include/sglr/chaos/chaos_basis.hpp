#pragma once

#include "sglr/chaos/legendre.hpp"
#include "sglr/chaos/multi_index.hpp"
#include "sglr/lowrank/operator_stack.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <span>
#include <tuple>
#include <vector>

namespace sglr::chaos {

/// One structurally nonzero entry [Gtilde_r]_{jk} = <psi_r psi_j psi_k>.
struct GtildeEntry {
  Eigen::Index r;
  Eigen::Index j;
  Eigen::Index k;
  double value;
};

/// Product Legendre basis over a total-degree index set, with the Galerkin
/// coupling matrices G_l and the triple-product tensor Gtilde.
class ChaosBasis {
 public:
  ChaosBasis(int m, int p) : set_(m, p), triple_(p), gtilde_(std::make_shared<GtildeCache>()) {
    assemble_G();
  }

  [[nodiscard]] const MultiIndexSet& index_set() const { return set_; }
  [[nodiscard]] int dim() const { return set_.dim(); }
  [[nodiscard]] int degree() const { return set_.degree(); }
  [[nodiscard]] Eigen::Index size() const { return set_.size(); }

  /// G_0 = I, G_l with entries <xi_l psi_k psi_j>.
  [[nodiscard]] const std::vector<SparseMatrix>& G() const { return G_; }

  /// Psi(xi) = [psi_0(xi), ..., psi_{n_xi-1}(xi)].
  [[nodiscard]] Eigen::VectorXd eval(const Eigen::VectorXd& xi) const {
    Eigen::VectorXd out(size());
    eval_into(xi, out.data());
    return out;
  }

  /// Columns of `points` (m x n) are sample points; returns n_xi x n.
  [[nodiscard]] Eigen::MatrixXd eval_many(const Eigen::MatrixXd& points) const {
    Eigen::MatrixXd out(size(), points.cols());
    for (Eigen::Index q = 0; q < points.cols(); ++q) eval_into(points.col(q), out.col(q).data());
    return out;
  }

  /// Rule-passing entries of every Gtilde_r, built on first use and shared by
  /// copies of this basis.
  [[nodiscard]] const std::vector<GtildeEntry>& gtilde() const {
    std::call_once(gtilde_->once, [this] { gtilde_->entries = build_gtilde(); });
    return gtilde_->entries;
  }

  /// Gtilde_r as a sparse matrix (test and inspection helper).
  [[nodiscard]] SparseMatrix gtilde_matrix(Eigen::Index r) const {
    std::vector<Eigen::Triplet<double>> t;
    for (const auto& e : gtilde())
      if (e.r == r) t.emplace_back(e.j, e.k, e.value);
    SparseMatrix S(size(), size());
    S.setFromTriplets(t.begin(), t.end());
    return S;
  }

  /// lambda_r = sum_{jk} [Gtilde_r]_{jk} H_{jk} for all r.
  [[nodiscard]] Eigen::VectorXd contract_gtilde(const Eigen::MatrixXd& H) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(size());
    for (const auto& e : gtilde()) out(e.r) += e.value * H(e.j, e.k);
    return out;
  }

  /// <psi_r psi_j psi_k> evaluated directly from the 1D table, ignoring the
  /// sparsity rule.
  [[nodiscard]] double triple(Eigen::Index r, Eigen::Index j, Eigen::Index k) const {
    const auto a = set_[r];
    const auto b = set_[j];
    const auto c = set_[k];
    double v = 1.0;
    for (int l = 0; l < dim(); ++l) v *= triple_(a[l], b[l], c[l]);
    return v;
  }

 private:
  struct GtildeCache {
    std::once_flag once;
    std::vector<GtildeEntry> entries;
  };

  template <class Vec>
  void eval_into(const Vec& xi, double* out) const {
    const int m = dim();
    const int p = degree();
    Eigen::MatrixXd table(p + 1, m);
    for (int l = 0; l < m; ++l) legendre_values(p, xi(l), table.col(l).data());
    for (Eigen::Index i = 0; i < size(); ++i) {
      const auto a = set_[i];
      double v = 1.0;
      for (int l = 0; l < m; ++l)
        if (a[l] != 0) v *= table(a[l], l);
      out[i] = v;
    }
  }

  void assemble_G() {
    const int m = dim();
    const Eigen::Index n = size();
    G_.assign(static_cast<std::size_t>(m + 1), SparseMatrix(n, n));
    G_[0].setIdentity();
    std::vector<std::vector<Eigen::Triplet<double>>> trip(static_cast<std::size_t>(m + 1));
    std::vector<int> up;
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto a = set_[k];
      for (int l = 0; l < m; ++l) {
        up.assign(a.begin(), a.end());
        ++up[static_cast<std::size_t>(l)];
        if (const auto j = set_.find(up)) {
          const double v = legendre_step_moment(a[l]);
          trip[static_cast<std::size_t>(l + 1)].emplace_back(k, *j, v);
          trip[static_cast<std::size_t>(l + 1)].emplace_back(*j, k, v);
        }
      }
    }
    for (int l = 1; l <= m; ++l) {
      auto& t = trip[static_cast<std::size_t>(l)];
      G_[static_cast<std::size_t>(l)].setFromTriplets(t.begin(), t.end());
    }
  }

  // For each ordered pair (j, k), enumerates the r allowed by the rule
  // |j_l - k_l| <= r_l <= j_l + k_l, r_l + j_l + k_l even, |r| <= p.
  [[nodiscard]] std::vector<GtildeEntry> build_gtilde() const {
    std::vector<GtildeEntry> out;
    const int m = dim();
    const int p = degree();
    std::vector<int> r(static_cast<std::size_t>(m), 0);
    for (Eigen::Index j = 0; j < size(); ++j) {
      const auto a = set_[j];
      for (Eigen::Index k = 0; k < size(); ++k) {
        const auto b = set_[k];
        enumerate_r(a, b, 0, 0, 1.0, r, p, [&](double v) {
          out.push_back({*set_.find(r), j, k, v});
        });
      }
    }
    std::sort(out.begin(), out.end(), [](const GtildeEntry& x, const GtildeEntry& y) {
      return std::tie(x.r, x.j, x.k) < std::tie(y.r, y.j, y.k);
    });
    return out;
  }

  template <class F>
  void enumerate_r(std::span<const int> a, std::span<const int> b, int l, int used, double v,
                   std::vector<int>& r, int p, F&& emit) const {
    if (l == dim()) {
      emit(v);
      return;
    }
    const int lo = std::abs(a[l] - b[l]);
    const int hi = std::min(a[l] + b[l], p - used);
    for (int c = lo; c <= hi; c += 2) {
      r[static_cast<std::size_t>(l)] = c;
      enumerate_r(a, b, l + 1, used + c, v * triple_(c, a[l], b[l]), r, p, emit);
    }
    r[static_cast<std::size_t>(l)] = 0;
  }

  MultiIndexSet set_;
  TripleProducts triple_;
  std::vector<SparseMatrix> G_;
  std::shared_ptr<GtildeCache> gtilde_;
};

}  // namespace sglr::chaos
