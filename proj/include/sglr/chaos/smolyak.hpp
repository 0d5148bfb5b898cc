#pragma once

#include "sglr/chaos/legendre.hpp"
#include "sglr/errors.hpp"

#include <Eigen/Core>

#include <map>
#include <vector>

namespace sglr::chaos {

/// Quadrature for the uniform probability measure on [-sqrt3, sqrt3]^m.
struct QuadratureRule {
  Eigen::MatrixXd points;  // m x n_q
  Eigen::VectorXd weights;
  int level = 0;

  [[nodiscard]] Eigen::Index size() const { return weights.size(); }
};

/// Gauss-Legendre point count used at 1D level i (i >= 1).
inline int smolyak_points_1d(int i) { return i; }

namespace detail {

inline long long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long c = 1;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

template <class F>
void for_each_level_vector(int m, int lo, int hi, std::vector<int>& cur, int pos, int sum, F&& f) {
  if (pos == m) {
    if (sum >= lo) f(cur, sum);
    return;
  }
  for (int i = 1; sum + i + (m - pos - 1) <= hi; ++i) {
    cur[static_cast<std::size_t>(pos)] = i;
    for_each_level_vector(m, lo, hi, cur, pos + 1, sum + i, f);
  }
}

}  // namespace detail

/// Smolyak combination of 1D Gauss-Legendre rules:
///   A(q, m) = sum_{q-m+1 <= |i| <= q} (-1)^{q-|i|} C(m-1, q-|i|) U^{i_1} x ... x U^{i_m}
/// with q = m + level - 1. Coincident points are merged by summing weights.
inline QuadratureRule smolyak_rule(int m, int level) {
  if (m < 1) throw ConfigError("smolyak_rule needs m >= 1");
  if (level < 1) throw ConfigError("smolyak_rule needs level >= 1");
  const int q = m + level - 1;

  std::vector<Rule1D> rules(static_cast<std::size_t>(level + 1));
  for (int i = 1; i <= level; ++i) {
    Rule1D r = gauss_legendre(smolyak_points_1d(i));
    for (auto& x : r.nodes) x *= sqrt3;
    for (auto& w : r.weights) w *= 0.5;
    rules[static_cast<std::size_t>(i)] = std::move(r);
  }

  std::map<std::vector<double>, double> merged;
  std::vector<int> levels(static_cast<std::size_t>(m), 1);
  std::vector<int> pos(static_cast<std::size_t>(m), 0);
  std::vector<double> pt(static_cast<std::size_t>(m), 0.0);
  detail::for_each_level_vector(m, std::max(m, q - m + 1), q, levels, 0, 0, [&](const std::vector<int>& lv, int sum) {
    const int d = q - sum;
    const double coef = ((d % 2 == 0) ? 1.0 : -1.0) * static_cast<double>(detail::binomial(m - 1, d));
    std::fill(pos.begin(), pos.end(), 0);
    while (true) {
      double w = coef;
      for (int l = 0; l < m; ++l) {
        const auto& r = rules[static_cast<std::size_t>(lv[static_cast<std::size_t>(l)])];
        const auto k = static_cast<std::size_t>(pos[static_cast<std::size_t>(l)]);
        pt[static_cast<std::size_t>(l)] = r.nodes[k];
        w *= r.weights[k];
      }
      merged[pt] += w;
      int l = 0;
      for (; l < m; ++l) {
        auto& c = pos[static_cast<std::size_t>(l)];
        if (++c < smolyak_points_1d(lv[static_cast<std::size_t>(l)])) break;
        c = 0;
      }
      if (l == m) break;
    }
  });

  QuadratureRule rule;
  rule.level = level;
  rule.points.resize(m, static_cast<Eigen::Index>(merged.size()));
  rule.weights.resize(static_cast<Eigen::Index>(merged.size()));
  Eigen::Index j = 0;
  for (const auto& [x, w] : merged) {
    for (int l = 0; l < m; ++l) rule.points(l, j) = x[static_cast<std::size_t>(l)];
    rule.weights(j) = w;
    ++j;
  }
  return rule;
}

}  // namespace sglr::chaos
