#pragma once

#include "sglr/errors.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdint>

namespace sglr::reference {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based uniform variate in [0, 1) for stream `seed`, position k.
inline double uniform01(std::uint64_t seed, std::uint64_t k) {
  const std::uint64_t x = splitmix64(splitmix64(seed) ^ splitmix64(k + 0x632be59bd9b4e019ULL));
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

/// Samples xi^(r) uniform on [-sqrt3, sqrt3]^m. Entry (l, r) depends only on
/// (seed, r, l), so any subset of samples can be regenerated independently.
struct SampleSet {
  std::uint64_t seed = 0;
  Eigen::MatrixXd points;  // m x n_r

  [[nodiscard]] Eigen::Index size() const { return points.cols(); }
  [[nodiscard]] int dim() const { return static_cast<int>(points.rows()); }
};

inline SampleSet make_samples(int m, Eigen::Index n_r, std::uint64_t seed) {
  if (m < 1) throw ConfigError("samples need m >= 1");
  if (n_r < 1) throw ConfigError("sample count must be >= 1");
  SampleSet s{seed, Eigen::MatrixXd(m, n_r)};
  const double a = std::sqrt(3.0);
  for (Eigen::Index r = 0; r < n_r; ++r)
    for (int l = 0; l < m; ++l)
      s.points(l, r) = a * (2.0 * uniform01(seed, static_cast<std::uint64_t>(r) * static_cast<std::uint64_t>(m) +
                                                       static_cast<std::uint64_t>(l)) -
                            1.0);
  return s;
}

}  // namespace sglr::reference
