#pragma once

// Experiment configuration: JSON file plus command-line overrides.

#include "sglr/errors.hpp"
#include "sglr/iteration/schedule.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>

namespace sglr::cli {

using iteration::Benchmark;
using nlohmann::json;

enum class VelocitySolve { exact, vcycle };

struct ExperimentConfig {
  Benchmark benchmark = Benchmark::diffusion;
  int n_c = 4;
  int n_c0 = 2;
  double b = 5.0;
  double sigma = 0.01;
  std::optional<int> m;  // unset: 95% energy rule
  int p = 3;
  std::optional<int> n_e;  // unset: 3 for diffusion, 1 for Stokes
  int level = 4;
  double tol_isi = 1e-5;
  int max_iterations = 50;
  std::optional<double> inner_tol;  // fixed inner tolerance instead of the schedule
  double eps_abs = 1e-8;
  std::optional<long long> rank_cap;
  VelocitySolve velocity = VelocitySolve::exact;
  bool full_rank = false;
  int n_r = 100;
  std::uint64_t seed = 1;
  double mc_tol = 1e-10;
  unsigned threads = 0;
  std::string output;

  [[nodiscard]] int eigen_count() const { return n_e.value_or(benchmark == Benchmark::diffusion ? 3 : 1); }

  void validate() const {
    if (n_c < 2 || n_c > 10) throw ConfigError("n_c must lie in [2, 10]");
    const bool hierarchy = benchmark == Benchmark::diffusion || velocity == VelocitySolve::vcycle;
    if (hierarchy && !(n_c0 >= 1 && n_c0 < n_c)) {
      throw ConfigError("n_c0 must satisfy 1 <= n_c0 < n_c");
    }
    if (!(b > 0.0)) throw ConfigError("b must be positive");
    if (!(sigma >= 0.0)) throw ConfigError("sigma must be nonnegative");
    if (m && *m < 1) throw ConfigError("m must be >= 1");
    if (p < 0) throw ConfigError("p must be >= 0");
    if (eigen_count() < 1) throw ConfigError("n_e must be >= 1");
    if (benchmark == Benchmark::stokes && eigen_count() != 1) throw ConfigError("Stokes runs compute n_e = 1");
    if (level < 1) throw ConfigError("quadrature level must be >= 1");
    if (!(tol_isi > 0.0)) throw ConfigError("tol_isi must be positive");
    if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
    if (inner_tol && !(*inner_tol > 0.0)) throw ConfigError("inner_tol must be positive");
    if (!(eps_abs >= 0.0)) throw ConfigError("eps_abs must be >= 0");
    if (rank_cap && *rank_cap < 1) throw ConfigError("rank_cap must be >= 1");
    if (n_r < 0) throw ConfigError("n_r must be >= 0");
    if (!(mc_tol > 0.0)) throw ConfigError("mc_tol must be positive");
  }
};

inline std::string to_string(Benchmark b) { return b == Benchmark::diffusion ? "diffusion" : "stokes"; }
inline std::string to_string(VelocitySolve v) { return v == VelocitySolve::exact ? "exact" : "vcycle"; }

inline Benchmark parse_benchmark(const std::string& s) {
  if (s == "diffusion") return Benchmark::diffusion;
  if (s == "stokes") return Benchmark::stokes;
  throw ConfigError("unknown benchmark '" + s + "' (diffusion | stokes)");
}

inline VelocitySolve parse_velocity(const std::string& s) {
  if (s == "exact") return VelocitySolve::exact;
  if (s == "vcycle") return VelocitySolve::vcycle;
  throw ConfigError("unknown velocity preconditioner '" + s + "' (exact | vcycle)");
}

inline json to_json(const ExperimentConfig& c) {
  json j;
  j["benchmark"] = to_string(c.benchmark);
  j["n_c"] = c.n_c;
  j["n_c0"] = c.n_c0;
  j["b"] = c.b;
  j["sigma"] = c.sigma;
  j["m"] = c.m ? json(*c.m) : json(nullptr);
  j["p"] = c.p;
  j["n_e"] = c.eigen_count();
  j["level"] = c.level;
  j["tol_isi"] = c.tol_isi;
  j["max_iterations"] = c.max_iterations;
  j["inner_tol"] = c.inner_tol ? json(*c.inner_tol) : json(nullptr);
  j["eps_abs"] = c.eps_abs;
  j["rank_cap"] = c.rank_cap ? json(*c.rank_cap) : json(nullptr);
  j["velocity_preconditioner"] = to_string(c.velocity);
  j["full_rank"] = c.full_rank;
  j["n_r"] = c.n_r;
  j["seed"] = c.seed;
  j["mc_tol"] = c.mc_tol;
  return j;
}

/// Applies the keys of `j` on top of `c`. Unknown keys and wrong types are
/// configuration errors; null clears an optional field.
inline void apply_json(ExperimentConfig& c, const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known{"benchmark", "n_c",       "n_c0",          "b",        "sigma",
                                           "m",         "p",         "n_e",           "level",    "tol_isi",
                                           "max_iterations", "inner_tol", "eps_abs",   "rank_cap", "velocity_preconditioner",
                                           "full_rank", "n_r",       "seed",          "mc_tol",   "threads",
                                           "output"};
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  try {
    if (j.contains("benchmark")) c.benchmark = parse_benchmark(j.at("benchmark").get<std::string>());
    if (j.contains("n_c")) c.n_c = j.at("n_c").get<int>();
    if (j.contains("n_c0")) c.n_c0 = j.at("n_c0").get<int>();
    if (j.contains("b")) c.b = j.at("b").get<double>();
    if (j.contains("sigma")) c.sigma = j.at("sigma").get<double>();
    if (j.contains("m")) c.m = j.at("m").is_null() ? std::nullopt : std::optional<int>(j.at("m").get<int>());
    if (j.contains("p")) c.p = j.at("p").get<int>();
    if (j.contains("n_e")) c.n_e = j.at("n_e").is_null() ? std::nullopt : std::optional<int>(j.at("n_e").get<int>());
    if (j.contains("level")) c.level = j.at("level").get<int>();
    if (j.contains("tol_isi")) c.tol_isi = j.at("tol_isi").get<double>();
    if (j.contains("max_iterations")) c.max_iterations = j.at("max_iterations").get<int>();
    if (j.contains("inner_tol")) {
      c.inner_tol = j.at("inner_tol").is_null() ? std::nullopt : std::optional<double>(j.at("inner_tol").get<double>());
    }
    if (j.contains("eps_abs")) c.eps_abs = j.at("eps_abs").get<double>();
    if (j.contains("rank_cap")) {
      c.rank_cap =
          j.at("rank_cap").is_null() ? std::nullopt : std::optional<long long>(j.at("rank_cap").get<long long>());
    }
    if (j.contains("velocity_preconditioner")) {
      c.velocity = parse_velocity(j.at("velocity_preconditioner").get<std::string>());
    }
    if (j.contains("full_rank")) c.full_rank = j.at("full_rank").get<bool>();
    if (j.contains("n_r")) c.n_r = j.at("n_r").get<int>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("mc_tol")) c.mc_tol = j.at("mc_tol").get<double>();
    if (j.contains("threads")) c.threads = j.at("threads").get<unsigned>();
    if (j.contains("output")) c.output = j.at("output").get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  ExperimentConfig c;
  apply_json(c, read_json_file(path));
  return c;
}

}  // namespace sglr::cli
