#pragma once

#include <algorithm>
#include <optional>

namespace sglr::iteration {

/// Inner-solve accuracy and the truncation tolerances coupled to it.
struct InnerTolerances {
  double tol = 1e-6;
  double eps_abs = 1e-8;
  double eps_rel = 1e-2;
};

enum class Benchmark { diffusion, stokes };

/// Inexact inverse iteration: tol = max(min(1e-2 eps_theta_prev, 1e-3), 1e-6).
/// A fixed tolerance overrides the adaptive rule.
inline InnerTolerances tolerance_schedule(double eps_theta_prev, Benchmark b,
                                          std::optional<double> fixed = std::nullopt) {
  InnerTolerances t;
  t.tol = fixed ? *fixed : std::max(std::min(1e-2 * eps_theta_prev, 1e-3), 1e-6);
  if (b == Benchmark::diffusion) {
    t.eps_abs = 1e-2 * t.tol;
    t.eps_rel = 1e-2;
  } else {
    t.eps_abs = 1e-2 * t.tol;
    t.eps_rel = 1e-1 * t.tol;
  }
  return t;
}

}  // namespace sglr::iteration
