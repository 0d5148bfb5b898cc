#pragma once

#include "sglr/errors.hpp"

#include <Eigen/Core>

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sglr::chaos {

/// Number of m-variate multi-indices of total degree <= p, i.e. (m+p)!/(m!p!).
inline Eigen::Index total_degree_count(int m, int p) {
  constexpr long long limit = 50'000'000;
  long long c = 1;
  for (int i = 1; i <= p; ++i) {
    c = c * (m + i) / i;
    if (c > limit) throw ConfigError("multi-index count exceeds " + std::to_string(limit));
  }
  return static_cast<Eigen::Index>(c);
}

/// Total-degree multi-index set in graded-lexicographic order: degree 0 first,
/// then degree 1 as e_1, ..., e_m, and so on. Within a degree, larger leading
/// components come first.
class MultiIndexSet {
 public:
  MultiIndexSet() = default;

  MultiIndexSet(int m, int p) : m_(m), p_(p) {
    if (m < 1) throw ConfigError("multi-index set needs m >= 1");
    if (p < 0) throw ConfigError("multi-index set needs p >= 0");
    const Eigen::Index n = total_degree_count(m, p);
    flat_.reserve(static_cast<std::size_t>(n * m));
    std::vector<int> cur(static_cast<std::size_t>(m), 0);
    for (int d = 0; d <= p; ++d) fill(cur, 0, d);
    for (Eigen::Index i = 0; i < size(); ++i) {
      const auto a = (*this)[i];
      lookup_.emplace(std::vector<int>(a.begin(), a.end()), i);
    }
  }

  [[nodiscard]] int dim() const { return m_; }
  [[nodiscard]] int degree() const { return p_; }
  [[nodiscard]] Eigen::Index size() const { return m_ == 0 ? 0 : static_cast<Eigen::Index>(flat_.size()) / m_; }

  [[nodiscard]] std::span<const int> operator[](Eigen::Index i) const {
    return {flat_.data() + i * m_, static_cast<std::size_t>(m_)};
  }

  [[nodiscard]] int total_degree(Eigen::Index i) const {
    int s = 0;
    for (int a : (*this)[i]) s += a;
    return s;
  }

  [[nodiscard]] std::optional<Eigen::Index> find(const std::vector<int>& alpha) const {
    const auto it = lookup_.find(alpha);
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
  }

 private:
  void fill(std::vector<int>& cur, int pos, int remaining) {
    if (pos == m_ - 1) {
      cur[static_cast<std::size_t>(pos)] = remaining;
      flat_.insert(flat_.end(), cur.begin(), cur.end());
      return;
    }
    for (int a = remaining; a >= 0; --a) {
      cur[static_cast<std::size_t>(pos)] = a;
      fill(cur, pos + 1, remaining - a);
    }
    cur[static_cast<std::size_t>(pos)] = 0;
  }

  int m_ = 0;
  int p_ = 0;
  std::vector<int> flat_;
  std::map<std::vector<int>, Eigen::Index> lookup_;
};

}  // namespace sglr::chaos
