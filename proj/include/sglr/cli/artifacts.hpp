#pragma once

// On-disk artifacts of an experiment: staged output directory, CSV writers
// and the binary gPC coefficient dump.

#include "sglr/cli/config.hpp"
#include "sglr/iteration/isi.hpp"

#include <array>
#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace sglr::cli {

namespace fs = std::filesystem;

/// Shortest round-trip decimal form.
inline std::string fmt(double x) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", x);
  return buf.data();
}

/// Writes into `<dir>.partial` and renames to `<dir>` on commit, so a failed
/// run never leaves a half-written output directory behind. An existing
/// target is refused.
class OutputDir {
 public:
  explicit OutputDir(fs::path target) : target_(std::move(target)) {
    if (target_.empty()) throw ConfigError("no output directory given");
    if (fs::exists(target_)) {
      throw ConfigError("output directory " + target_.string() + " already exists; choose a new one");
    }
    staging_ = target_;
    staging_ += ".partial";
    fs::remove_all(staging_);
    fs::create_directories(staging_);
  }
  OutputDir(const OutputDir&) = delete;
  OutputDir& operator=(const OutputDir&) = delete;
  ~OutputDir() {
    if (!committed_) {
      std::error_code ec;
      fs::remove_all(staging_, ec);
    }
  }

  [[nodiscard]] fs::path file(const std::string& name) const { return staging_ / name; }
  [[nodiscard]] const fs::path& target() const { return target_; }

  void commit() {
    fs::rename(staging_, target_);
    committed_ = true;
  }

 private:
  fs::path target_;
  fs::path staging_;
  bool committed_ = false;
};

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw NumericalError("cannot write " + path.string());
  out << text;
  if (!out) throw NumericalError("write failed: " + path.string());
}

inline void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

/// iteration, eps_theta, inner tolerances, then per eigenvector the rank after
/// the solve and after orthonormalization, inner iterations, final inner
/// residual and convergence flag; optional diagnostics last.
inline std::string convergence_csv(const std::vector<iteration::IterationRecord>& h, int n_e) {
  std::ostringstream os;
  os << "iteration,eps_theta,inner_tol,inner_eps_rel,inner_eps_abs";
  for (int s = 1; s <= n_e; ++s) {
    os << ",solve_rank_" << s << ",rank_" << s << ",inner_iterations_" << s << ",inner_residual_" << s
       << ",inner_converged_" << s;
  }
  const bool diag = !h.empty() && !h.front().residual.empty();
  if (diag) {
    for (int s = 1; s <= n_e; ++s) os << ",residual_" << s << ",coef_diff_" << s;
  }
  os << "\n";
  for (const auto& r : h) {
    os << r.iteration << ',' << fmt(r.eps_theta) << ',' << fmt(r.inner.tol) << ',' << fmt(r.inner.eps_rel) << ','
       << fmt(r.inner.eps_abs);
    for (std::size_t s = 0; s < static_cast<std::size_t>(n_e); ++s) {
      os << ',' << r.solve_ranks[s] << ',' << r.ranks[s] << ',' << r.inner_iterations[s] << ','
         << fmt(r.inner_residuals[s]) << ',' << (r.inner_converged[s] ? 1 : 0);
    }
    if (diag) {
      for (std::size_t s = 0; s < static_cast<std::size_t>(n_e); ++s) {
        os << ',' << fmt(r.residual[s]) << ',' << fmt(r.coef_diff[s]);
      }
    }
    os << "\n";
  }
  return os.str();
}

/// Residual-versus-iteration traces of every inner solve.
inline std::string traces_csv(const std::vector<iteration::IterationRecord>& h) {
  std::ostringstream os;
  os << "iteration,eigenvector,inner_iteration,relative_residual,rank\n";
  for (const auto& r : h) {
    for (std::size_t s = 0; s < r.inner_traces.size(); ++s) {
      for (const auto& t : r.inner_traces[s]) {
        os << r.iteration << ',' << s + 1 << ',' << t.iteration << ',' << fmt(t.residual) << ',' << t.rank << "\n";
      }
    }
  }
  return os.str();
}

inline std::string spectrum_csv(const Eigen::VectorXd& values) {
  std::ostringstream os;
  os << "index,eigenvalue\n";
  for (Eigen::Index k = 0; k < values.size(); ++k) os << k + 1 << ',' << fmt(values(k)) << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Coefficient dump.
//
// Little-endian throughout:
//   char[8]  "SGLRCOEF"
//   u32      version (1)
//   u32      n_e
//   u64      n_vec, n_xi
//   n_e times: u64 rank, Y (n_vec x rank, row-major f64), Z (n_xi x rank, row-major f64)
//   n_e times: lambda^s gPC coefficients (n_xi f64)
//   n_e * n_e times, s-major: T_st gPC coefficients (n_xi f64)
// u^s = Y Z^T holds the transformed eigenvector coefficients (column k is the
// coefficient of psi_k).

struct CoefficientDump {
  std::vector<lowrank::FactoredMatrix> U;
  std::vector<Eigen::VectorXd> lambda;
  iteration::RitzCoefficients ritz;
};

inline constexpr std::array<char, 8> kCoefMagic{'S', 'G', 'L', 'R', 'C', 'O', 'E', 'F'};
inline constexpr std::uint32_t kCoefVersion = 1;

namespace detail {

class ByteWriter {
 public:
  void bytes(const char* p, std::size_t n) { buf_.append(p, n); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
  void rows(const Eigen::MatrixXd& A) {
    for (Eigen::Index i = 0; i < A.rows(); ++i)
      for (Eigen::Index j = 0; j < A.cols(); ++j) f64(A(i, j));
  }
  void vec(const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) f64(v(i));
  }
  [[nodiscard]] const std::string& str() const { return buf_; }

 private:
  void put(std::uint64_t v, int n) {
    for (int k = 0; k < n; ++k) buf_.push_back(static_cast<char>((v >> (8 * k)) & 0xffU));
  }
  std::string buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string data) : data_(std::move(data)) {}
  void bytes(char* p, std::size_t n) {
    need(n);
    std::memcpy(p, data_.data() + pos_, n);
    pos_ += n;
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  double f64() { return std::bit_cast<double>(get(8)); }
  Eigen::MatrixXd rows(std::uint64_t r, std::uint64_t c) {
    need(8 * r * c);
    Eigen::MatrixXd A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    for (Eigen::Index i = 0; i < A.rows(); ++i)
      for (Eigen::Index j = 0; j < A.cols(); ++j) A(i, j) = f64();
    return A;
  }
  Eigen::VectorXd vec(std::uint64_t n) {
    need(8 * n);
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = f64();
    return v;
  }
  [[nodiscard]] bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::uint64_t n) const {
    if (n > data_.size() - pos_) throw ConfigError("coefficient file is truncated");
  }
  std::uint64_t get(int n) {
    need(static_cast<std::uint64_t>(n));
    std::uint64_t v = 0;
    for (int k = 0; k < n; ++k) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + k])) << (8 * k);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::string data_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string encode_coefficients(const CoefficientDump& d) {
  if (d.U.empty() || d.lambda.size() != d.U.size() || d.ritz.size() != d.U.size()) {
    throw DimensionError("coefficient dump: inconsistent eigenpair counts");
  }
  const Eigen::Index n_vec = d.U.front().rows();
  const Eigen::Index n_xi = d.U.front().cols();
  detail::ByteWriter w;
  w.bytes(kCoefMagic.data(), kCoefMagic.size());
  w.u32(kCoefVersion);
  w.u32(static_cast<std::uint32_t>(d.U.size()));
  w.u64(static_cast<std::uint64_t>(n_vec));
  w.u64(static_cast<std::uint64_t>(n_xi));
  for (const auto& u : d.U) {
    if (u.rows() != n_vec || u.cols() != n_xi) throw DimensionError("coefficient dump: shape mismatch");
    w.u64(static_cast<std::uint64_t>(u.rank()));
    w.rows(u.Y());
    w.rows(u.Z());
  }
  for (const auto& l : d.lambda) {
    if (l.size() != n_xi) throw DimensionError("coefficient dump: lambda length mismatch");
    w.vec(l);
  }
  for (const auto& row : d.ritz.T)
    for (const auto& t : row) {
      if (t.size() != n_xi) throw DimensionError("coefficient dump: T length mismatch");
      w.vec(t);
    }
  return w.str();
}

inline CoefficientDump decode_coefficients(std::string data) {
  detail::ByteReader r(std::move(data));
  std::array<char, 8> magic{};
  r.bytes(magic.data(), magic.size());
  if (magic != kCoefMagic) throw ConfigError("not a coefficient file (bad magic)");
  if (r.u32() != kCoefVersion) throw ConfigError("unsupported coefficient file version");
  const std::uint32_t ne = r.u32();
  const std::uint64_t n_vec = r.u64();
  const std::uint64_t n_xi = r.u64();
  CoefficientDump d;
  for (std::uint32_t s = 0; s < ne; ++s) {
    const std::uint64_t k = r.u64();
    Eigen::MatrixXd Y = r.rows(n_vec, k);
    Eigen::MatrixXd Z = r.rows(n_xi, k);
    d.U.emplace_back(std::move(Y), std::move(Z));
  }
  for (std::uint32_t s = 0; s < ne; ++s) d.lambda.push_back(r.vec(n_xi));
  d.ritz.T.resize(ne);
  for (std::uint32_t s = 0; s < ne; ++s)
    for (std::uint32_t t = 0; t < ne; ++t) d.ritz.T[s].push_back(r.vec(n_xi));
  if (!r.done()) throw ConfigError("coefficient file has trailing bytes");
  return d;
}

inline void write_coefficients(const fs::path& path, const CoefficientDump& d) { write_text(path, encode_coefficients(d)); }

inline CoefficientDump read_coefficients(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return decode_coefficients(os.str());
}

template <class T>
CoefficientDump make_dump(const iteration::EigenSolution<T>& sol) {
  CoefficientDump d;
  for (const auto& u : sol.U) d.U.push_back(lowrank::Coefficients<T>::to_factored(u));
  d.lambda = sol.lambda;
  d.ritz = sol.ritz;
  return d;
}

/// Sidecar metadata describing the dump.
inline json dump_metadata(const CoefficientDump& d, const ExperimentConfig& c, int m) {
  json j;
  j["format"] = "SGLRCOEF";
  j["version"] = kCoefVersion;
  j["byte_order"] = "little-endian";
  j["benchmark"] = to_string(c.benchmark);
  j["variable"] = c.benchmark == Benchmark::diffusion ? "w = L^T u, M = L L^T" : "w = L_p^T q, M_p = L_p L_p^T";
  j["n_e"] = d.U.size();
  j["n_vec"] = d.U.front().rows();
  j["n_xi"] = d.U.front().cols();
  j["m"] = m;
  j["p"] = c.p;
  std::vector<Eigen::Index> ranks;
  for (const auto& u : d.U) ranks.push_back(u.rank());
  j["ranks"] = ranks;
  return j;
}

}  // namespace sglr::cli
