// sglr: low-rank stochastic Galerkin eigensolver front-end.
//
//   sglr run     [--config FILE] [overrides] --output DIR
//   sglr mc      [--config FILE] [overrides] --output DIR
//   sglr compare --run DIR [--n-r N] [--seed S] [--mc-tol T] --output DIR
//   sglr table   --which ranks|errors|timings DIR...
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include "sglr/cli/pipeline.hpp"
#include "sglr/cli/table.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace {

using sglr::cli::json;

constexpr int kConfigExit = 2;
constexpr int kNumericalExit = 3;

/// Collects command-line overrides as a JSON object applied on top of the
/// config file.
struct Overrides {
  json j = json::object();

  template <class V>
  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    app->add_option_function<V>(flag, [this, key](const V& v) { j[key] = v; }, help);
  }
};

void experiment_options(CLI::App* app, Overrides& o, std::string& config_file) {
  app->add_option("--config", config_file, "JSON experiment configuration")->check(CLI::ExistingFile);
  o.add<std::string>(app, "--benchmark", "benchmark", "diffusion | stokes");
  o.add<int>(app, "--n-c", "n_c", "grid level (2^n_c elements per side)");
  o.add<int>(app, "--n-c0", "n_c0", "coarsest multigrid level");
  o.add<double>(app, "--b", "b", "correlation length");
  o.add<double>(app, "--sigma", "sigma", "standard deviation of the random field");
  o.add<int>(app, "--m", "m", "number of KL modes (default: 95% energy rule)");
  o.add<int>(app, "--p", "p", "total gPC degree");
  o.add<int>(app, "--n-e", "n_e", "number of eigenpairs");
  o.add<int>(app, "--level", "level", "Smolyak quadrature level");
  o.add<double>(app, "--tol-isi", "tol_isi", "outer stopping tolerance on eps_theta");
  o.add<int>(app, "--max-iterations", "max_iterations", "outer iteration limit");
  o.add<double>(app, "--inner-tol", "inner_tol", "fixed inner tolerance (default: adaptive schedule)");
  o.add<double>(app, "--eps-abs", "eps_abs", "absolute truncation after orthonormalization");
  o.add<long long>(app, "--rank-cap", "rank_cap", "rank cap for the inner solver");
  o.add<std::string>(app, "--velocity-preconditioner", "velocity_preconditioner", "exact | vcycle (Stokes)");
  app->add_flag_function("--full-rank", [&o](std::int64_t) { o.j["full_rank"] = true; },
                         "full-rank coefficients, no truncation");
  o.add<int>(app, "--n-r", "n_r", "Monte Carlo sample count");
  o.add<std::uint64_t>(app, "--seed", "seed", "sample generator seed");
  o.add<double>(app, "--mc-tol", "mc_tol", "Monte Carlo eigensolver tolerance");
  o.add<unsigned>(app, "--threads", "threads", "worker threads (0: hardware concurrency)");
  o.add<std::string>(app, "--output", "output", "output directory (must not exist)");
}

sglr::cli::ExperimentConfig build_config(const std::string& file, const json& overrides) {
  sglr::cli::ExperimentConfig c = file.empty() ? sglr::cli::ExperimentConfig{} : sglr::cli::load_config(file);
  sglr::cli::apply_json(c, overrides);
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-rank stochastic Galerkin eigensolver"};
  app.require_subcommand(1);

  std::string run_config;
  Overrides run_o;
  CLI::App* run = app.add_subcommand("run", "solve, compare with Monte Carlo, write artifacts");
  experiment_options(run, run_o, run_config);

  std::string mc_config;
  Overrides mc_o;
  CLI::App* mc = app.add_subcommand("mc", "Monte Carlo reference only");
  experiment_options(mc, mc_o, mc_config);

  std::string cmp_run;
  std::string cmp_out;
  Overrides cmp_o;
  CLI::App* cmp = app.add_subcommand("compare", "evaluate a stored run against Monte Carlo");
  cmp->add_option("--run", cmp_run, "directory written by 'sglr run'")->required()->check(CLI::ExistingDirectory);
  cmp->add_option("--output", cmp_out, "output directory (must not exist)")->required();
  cmp_o.add<int>(cmp, "--n-r", "n_r", "Monte Carlo sample count");
  cmp_o.add<std::uint64_t>(cmp, "--seed", "seed", "sample generator seed");
  cmp_o.add<double>(cmp, "--mc-tol", "mc_tol", "Monte Carlo eigensolver tolerance");
  cmp_o.add<unsigned>(cmp, "--threads", "threads", "worker threads (0: hardware concurrency)");

  std::string which = "ranks";
  std::vector<std::string> dirs;
  CLI::App* tab = app.add_subcommand("table", "render run artifacts as text tables");
  tab->add_option("--which", which, "ranks | errors | timings")->check(CLI::IsMember({"ranks", "errors", "timings"}));
  tab->add_option("dirs", dirs, "run directories")->required()->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfigExit;
  }

  try {
    if (*run) {
      sglr::cli::run(build_config(run_config, run_o.j), std::cerr);
    } else if (*mc) {
      sglr::cli::run_mc(build_config(mc_config, mc_o.j), std::cerr);
    } else if (*cmp) {
      sglr::cli::run_compare(cmp_run, cmp_o.j, cmp_out, std::cerr);
    } else if (*tab) {
      std::vector<std::filesystem::path> paths(dirs.begin(), dirs.end());
      std::cout << sglr::cli::table(sglr::cli::parse_table_kind(which), paths);
    }
  } catch (const sglr::ConfigError& e) {
    std::cerr << "sglr: configuration error: " << e.what() << "\n";
    return kConfigExit;
  } catch (const std::exception& e) {
    std::cerr << "sglr: numerical failure: " << e.what() << "\n";
    return kNumericalExit;
  }
  return 0;
}
