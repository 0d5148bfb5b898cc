#pragma once

#include "sglr/errors.hpp"
#include "sglr/lowrank/operator_stack.hpp"

#include <unsupported/Eigen/SparseExtra>

#include <string>

namespace sglr::discretize {

/// MatrixMarket coordinate export for offline inspection.
inline void write_matrix_market(const std::string& path, const SparseMatrix& A) {
  if (!Eigen::saveMarket(A, path)) throw ConfigError("cannot write " + path);
}

inline SparseMatrix read_matrix_market(const std::string& path) {
  SparseMatrix A;
  if (!Eigen::loadMarket(A, path)) throw ConfigError("cannot read " + path);
  return A;
}

}  // namespace sglr::discretize
