#pragma once

#include "sglr/errors.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace sglr::randfield {

/// Eigenpair of the 1D kernel exp(-|s-t|/b) on [-1, 1].
struct Mode1D {
  double omega = 0.0;
  double lambda = 0.0;
  bool even = true;
  double scale = 1.0;  // normalization with the sign convention folded in

  [[nodiscard]] double operator()(double x) const {
    return scale * (even ? std::cos(omega * x) : std::sin(omega * x));
  }
};

namespace detail {

template <class F>
double bisect(F&& f, double lo, double hi) {
  double flo = f(lo);
  if (flo == 0.0) return lo;
  if ((flo > 0) == (f(hi) > 0)) throw NumericalError("KL root bracket has no sign change");
  for (int it = 0; it < 200 && hi - lo > 4 * std::numeric_limits<double>::epsilon() * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// The n largest 1D eigenpairs, sorted by decreasing eigenvalue, unit L2
/// norm on [-1, 1] and positive at x = -1.
///
/// With c = 1/b, even modes cos(wx) solve c cos w - w sin w = 0 with
/// w in (k pi, k pi + pi/2); odd modes sin(wx) solve w cos w + c sin w = 0
/// with w in (k pi - pi/2, k pi). The eigenvalue is 2c / (w^2 + c^2).
inline std::vector<Mode1D> kl_modes_1d(double b, int n) {
  constexpr double pi = std::numbers::pi;
  const double c = 1.0 / b;
  std::vector<Mode1D> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int k = 0; static_cast<int>(out.size()) < n; ++k) {
    const double we = detail::bisect([c](double w) { return c * std::cos(w) - w * std::sin(w); }, k * pi,
                                     k * pi + pi / 2);
    out.push_back({we, 2 * c / (we * we + c * c), true, 1.0 / std::sqrt(1.0 + std::sin(2 * we) / (2 * we))});
    if (static_cast<int>(out.size()) == n) break;
    const double wo = detail::bisect([c](double w) { return w * std::cos(w) + c * std::sin(w); },
                                     (k + 1) * pi - pi / 2, (k + 1) * pi);
    out.push_back({wo, 2 * c / (wo * wo + c * c), false, 1.0 / std::sqrt(1.0 - std::sin(2 * wo) / (2 * wo))});
  }
  for (auto& mode : out)
    if (mode(-1.0) < 0) mode.scale = -mode.scale;
  return out;
}

/// Truncated Karhunen-Loeve expansion of a field on [-1, 1]^2 with covariance
/// sigma^2 exp(-|x-y|_1 / b):
///   a(x, xi) = a_0 + sum_l sqrt(beta_l) a_l(x) xi_l.
/// The l1 distance makes the kernel separable, so each 2D mode is a product
/// of two 1D modes and beta = sigma^2 lambda_i lambda_j.
class KLExpansion {
 public:
  /// Number of 1D modes whose products form the candidate 2D spectrum.
  static constexpr int modes_1d = 100;

  KLExpansion(double b, double sigma, std::optional<int> m = std::nullopt, double mean = 1.0)
      : b_(b), sigma_(sigma), mean_(mean) {
    if (!(b > 0)) throw ConfigError("correlation length b must be positive");
    if (!(sigma >= 0)) throw ConfigError("standard deviation sigma must be nonnegative");
    modes1d_ = kl_modes_1d(b, modes_1d);
    struct Pair {
      double beta;
      int i;
      int j;
    };
    std::vector<Pair> pairs;
    pairs.reserve(static_cast<std::size_t>(modes_1d * modes_1d));
    for (int i = 0; i < modes_1d; ++i)
      for (int j = 0; j < modes_1d; ++j)
        pairs.push_back({modes1d_[static_cast<std::size_t>(i)].lambda * modes1d_[static_cast<std::size_t>(j)].lambda, i, j});
    std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) { return x.beta > y.beta; });

    double total = 0.0;
    for (const auto& pr : pairs) total += pr.beta;
    int count = 0;
    if (m) {
      if (*m < 0 || *m > static_cast<int>(pairs.size())) throw ConfigError("KL mode count out of range");
      count = *m;
    } else {
      double acc = 0.0;
      while (count < static_cast<int>(pairs.size()) && acc < energy_threshold * total) acc += pairs[static_cast<std::size_t>(count++)].beta;
    }
    double kept = 0.0;
    for (int l = 0; l < count; ++l) {
      const auto& pr = pairs[static_cast<std::size_t>(l)];
      index_.emplace_back(pr.i, pr.j);
      beta_.push_back(sigma * sigma * pr.beta);
      kept += pr.beta;
    }
    energy_ratio_ = total > 0 ? kept / total : 1.0;
  }

  static constexpr double energy_threshold = 0.95;

  [[nodiscard]] int size() const { return static_cast<int>(beta_.size()); }
  [[nodiscard]] double b() const { return b_; }
  [[nodiscard]] double sigma() const { return sigma_; }
  [[nodiscard]] double mean() const { return mean_; }
  /// beta_l for l = 1..m.
  [[nodiscard]] double beta(int l) const { return beta_[static_cast<std::size_t>(l - 1)]; }
  [[nodiscard]] double retained_energy() const { return energy_ratio_; }
  [[nodiscard]] const std::vector<Mode1D>& modes1d() const { return modes1d_; }
  [[nodiscard]] std::pair<int, int> mode_factors(int l) const { return index_[static_cast<std::size_t>(l - 1)]; }

  /// Unit-norm eigenfunction a_l(x), l = 1..m.
  [[nodiscard]] double mode(int l, double x1, double x2) const {
    const auto [i, j] = index_[static_cast<std::size_t>(l - 1)];
    return modes1d_[static_cast<std::size_t>(i)](x1) * modes1d_[static_cast<std::size_t>(j)](x2);
  }

  /// Coefficient function of xi_l in a(x, xi): a_0 for l = 0, sqrt(beta_l) a_l
  /// for l >= 1.
  [[nodiscard]] double coefficient(int l, double x1, double x2) const {
    if (l == 0) return mean_;
    return std::sqrt(beta(l)) * mode(l, x1, x2);
  }

  [[nodiscard]] double eval(double x1, double x2, const Eigen::VectorXd& xi) const {
    if (xi.size() < size()) throw DimensionError("kl eval: xi shorter than mode count");
    double a = mean_;
    for (int l = 1; l <= size(); ++l) a += std::sqrt(beta(l)) * mode(l, x1, x2) * xi(l - 1);
    return a;
  }

  /// Smallest value of a(x, xi) over xi in [-sqrt3, sqrt3]^m at x.
  [[nodiscard]] double lower_bound(double x1, double x2) const {
    double a = mean_;
    for (int l = 1; l <= size(); ++l) a -= std::numbers::sqrt3 * std::sqrt(beta(l)) * std::abs(mode(l, x1, x2));
    return a;
  }

  /// Throws ConfigError unless the field is strictly positive for every
  /// admissible xi at each of the given points (columns of a 2 x n matrix).
  void require_positive(const Eigen::Matrix2Xd& points) const {
    for (Eigen::Index q = 0; q < points.cols(); ++q) {
      const double lb = lower_bound(points(0, q), points(1, q));
      if (!(lb > 0)) {
        throw ConfigError("random coefficient is not strictly positive (lower bound " + std::to_string(lb) +
                          " at x = (" + std::to_string(points(0, q)) + ", " + std::to_string(points(1, q)) + "))");
      }
    }
  }

 private:
  double b_;
  double sigma_;
  double mean_;
  std::vector<Mode1D> modes1d_;
  std::vector<std::pair<int, int>> index_;
  std::vector<double> beta_;
  double energy_ratio_ = 1.0;
};

}  // namespace sglr::randfield
