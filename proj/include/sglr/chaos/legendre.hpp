#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

namespace sglr::chaos {

inline constexpr double sqrt3 = std::numbers::sqrt3;

/// psi_0(x) .. psi_n(x): Legendre polynomials orthonormal with respect to the
/// uniform density on [-sqrt3, sqrt3], so psi_0 = 1 and psi_1(x) = x.
inline void legendre_values(int n, double x, double* out) {
  const double t = x / sqrt3;
  double pm1 = 1.0;
  double p = t;
  out[0] = 1.0;
  if (n >= 1) out[1] = std::sqrt(3.0) * t;
  for (int k = 1; k < n; ++k) {
    const double next = ((2.0 * k + 1.0) * t * p - k * pm1) / (k + 1.0);
    pm1 = p;
    p = next;
    out[k + 1] = std::sqrt(2.0 * (k + 1) + 1.0) * p;
  }
}

inline Eigen::VectorXd legendre_values(int n, double x) {
  Eigen::VectorXd v(n + 1);
  legendre_values(n, x, v.data());
  return v;
}

/// <x psi_a psi_{a+1}> under the uniform density on [-sqrt3, sqrt3].
inline double legendre_step_moment(int a) {
  return std::sqrt(3.0) * (a + 1.0) / std::sqrt((2.0 * a + 1.0) * (2.0 * a + 3.0));
}

struct Rule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1] (weights sum to 2). Nodes are
/// computed for one half and mirrored so the rule is exactly symmetric.
inline Rule1D gauss_legendre(int n) {
  Rule1D r;
  r.nodes.assign(static_cast<std::size_t>(n), 0.0);
  r.weights.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 1; k < n; ++k) {
        const double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    if (2 * i + 1 == n) x = 0.0;
    // Recompute the derivative at the converged node for the weight.
    double p0 = 1.0;
    double p1 = x;
    for (int k = 1; k < n; ++k) {
      const double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    r.nodes[lo] = -x;
    r.nodes[hi] = x;
    r.weights[lo] = w;
    r.weights[hi] = w;
  }
  return r;
}

/// Table of <psi_a psi_b psi_c> for a, b, c <= p, via Gauss quadrature that is
/// exact for degree 3p.
class TripleProducts {
 public:
  explicit TripleProducts(int p) : p_(p), t_(static_cast<std::size_t>((p + 1) * (p + 1) * (p + 1)), 0.0) {
    const Rule1D rule = gauss_legendre(std::max(1, (3 * p) / 2 + 1));
    Eigen::VectorXd v(p + 1);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      legendre_values(p, sqrt3 * rule.nodes[q], v.data());
      const double w = 0.5 * rule.weights[q];
      for (int a = 0; a <= p; ++a)
        for (int b = a; b <= p; ++b)
          for (int c = b; c <= p; ++c) t_[idx(a, b, c)] += w * v(a) * v(b) * v(c);
    }
    // Fill the other orderings from the sorted one so the table is exactly
    // symmetric.
    for (int a = 0; a <= p; ++a)
      for (int b = 0; b <= p; ++b)
        for (int c = 0; c <= p; ++c) {
          int s[3] = {a, b, c};
          std::sort(s, s + 3);
          t_[idx(a, b, c)] = t_[idx(s[0], s[1], s[2])];
        }
  }

  [[nodiscard]] double operator()(int a, int b, int c) const { return t_[idx(a, b, c)]; }

 private:
  [[nodiscard]] std::size_t idx(int a, int b, int c) const {
    return static_cast<std::size_t>((a * (p_ + 1) + b) * (p_ + 1) + c);
  }
  int p_;
  std::vector<double> t_;
};

}  // namespace sglr::chaos
