#pragma once

// The run / mc / compare pipelines behind the command-line front-end.

#include "sglr/cli/artifacts.hpp"
#include "sglr/reference/compare.hpp"
#include "sglr/reference/samples.hpp"
#include "sglr/solvers/preconditioners.hpp"

#include <chrono>
#include <functional>
#include <ostream>

namespace sglr::cli {

using clock_type = std::chrono::steady_clock;

inline double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

inline randfield::KLExpansion make_field(const ExperimentConfig& c) { return {c.b, c.sigma, c.m}; }

/// Calls f(problem) with the assembled diffusion or Stokes problem.
template <class F>
decltype(auto) with_problem(const ExperimentConfig& c, const randfield::KLExpansion& kl, F&& f) {
  if (c.benchmark == Benchmark::diffusion) return f(discretize::assemble_diffusion(c.n_c, kl));
  return f(discretize::assemble_stokes(c.n_c, kl));
}

/// Calls f(adapter) with the adapter for `p` over coefficient type T.
template <class T, class F>
decltype(auto) with_adapter(const ExperimentConfig& c, const randfield::KLExpansion& kl,
                            const discretize::DiffusionProblem& p, const chaos::ChaosBasis& basis, F&& f) {
  const discretize::GridHierarchy h = discretize::build_hierarchy(p, c.n_c0, kl);
  solvers::MultigridConfig mg;
  if (c.rank_cap) mg.rank_cap = static_cast<Eigen::Index>(*c.rank_cap);
  const iteration::DiffusionAdapter<T> a(p, basis, h, mg);
  return f(a);
}

template <class T, class F>
decltype(auto) with_adapter(const ExperimentConfig& c, const randfield::KLExpansion& kl,
                            const discretize::StokesProblem& p, const chaos::ChaosBasis& basis, F&& f) {
  std::optional<discretize::GridHierarchy> h;
  if (c.velocity == VelocitySolve::vcycle) h = discretize::build_hierarchy(p, c.n_c0, kl);
  solvers::MinresConfig mr;
  if (c.rank_cap) mr.rank_cap = static_cast<Eigen::Index>(*c.rank_cap);
  const auto kind = c.velocity == VelocitySolve::vcycle ? solvers::MeanSolveKind::vcycle : solvers::MeanSolveKind::exact;
  const iteration::StokesAdapter<T> a(p, basis, solvers::mean_preconditioner(p, kind, h ? &*h : nullptr), mr);
  return f(a);
}

inline json report_json(const reference::ErrorReport& r) {
  return {{"eps_lambda", r.eps_lambda}, {"eps_u", r.eps_u}};
}

inline Eigen::Index vector_size(const discretize::DiffusionProblem& p) { return p.n_x(); }
inline Eigen::Index vector_size(const discretize::StokesProblem& p) { return p.n_p(); }

/// Surrogate-versus-Monte-Carlo errors with and without refinement, plus the
/// sampling and reference timings.
template <class T, class Adapter, class Problem>
std::pair<json, json> evaluate(const ExperimentConfig& c, const iteration::EigenSolution<T>& sol, const Adapter& a,
                               const Problem& p, const chaos::ChaosBasis& basis, int m) {
  const reference::SampleSet s = reference::make_samples(m, c.n_r, c.seed);
  auto t0 = clock_type::now();
  const auto sg_rr = reference::sg_samples(sol, a, basis, s.points, true, c.threads);
  const double t_sample = seconds_since(t0);
  t0 = clock_type::now();
  const auto sg_plain = reference::sg_samples(sol, a, basis, s.points, false, c.threads);
  const double t_sample_plain = seconds_since(t0);
  t0 = clock_type::now();
  const auto mc = reference::mc_eigensolve(p, s.points, c.eigen_count(), c.mc_tol, c.threads);
  const double t_mc = seconds_since(t0);
  json errors{{"n_r", c.n_r},
              {"seed", c.seed},
              {"rayleigh_ritz", report_json(reference::compare(sg_rr, mc))},
              {"plain", report_json(reference::compare(sg_plain, mc))}};
  json timings{{"t_sample", t_sample}, {"t_sample_plain", t_sample_plain}, {"t_mc", t_mc}};
  return {errors, timings};
}

inline json problem_json(const ExperimentConfig& c, int m, Eigen::Index n_xi, Eigen::Index n_vec) {
  return {{"benchmark", to_string(c.benchmark)}, {"n_c", c.n_c},           {"m", m},
          {"p", c.p},                            {"n_xi", n_xi},           {"n_vec", n_vec},
          {"n_e", c.eigen_count()},              {"full_rank", c.full_rank}};
}

/// Solves the stochastic eigenproblem and writes every artifact; returns the
/// errors document (empty errors when n_r = 0).
template <class T>
json run_typed(const ExperimentConfig& c, OutputDir& out, std::ostream& log) {
  const auto t_setup0 = clock_type::now();
  const randfield::KLExpansion kl = make_field(c);
  const int m = kl.size();
  if (m < 1) throw ConfigError("the random field has no modes (sigma = 0 or m = 0)");
  const chaos::ChaosBasis basis(m, c.p);
  return with_problem(c, kl, [&](const auto& p) {
    return with_adapter<T>(c, kl, p, basis, [&](const auto& a) {
      const iteration::QuadratureContext q(basis, chaos::smolyak_rule(m, c.level));
      const double t_setup = seconds_since(t_setup0);
      log << to_string(c.benchmark) << ": n_c=" << c.n_c << " n_vec=" << a.n_vec() << " m=" << m
          << " n_xi=" << basis.size() << " quadrature=" << q.size() << (c.full_rank ? " (full rank)" : "") << "\n";

      iteration::IterationConfig ic;
      ic.n_e = c.eigen_count();
      ic.tol_isi = c.tol_isi;
      ic.max_iterations = c.max_iterations;
      ic.fixed_inner_tol = c.inner_tol;
      ic.eps_abs = c.eps_abs;
      auto t0 = clock_type::now();
      const auto sol = iteration::isi_run<T>(a, basis, q, ic);
      const double t_solve = seconds_since(t0);
      const double eps_last = sol.history.empty() ? 0.0 : sol.history.back().eps_theta;
      log << "  " << (sol.converged ? "converged" : "not converged") << " after " << sol.iterations()
          << " iterations, eps_theta=" << fmt(eps_last) << ", t_solve=" << t_solve << " s\n";

      write_json(out.file("config.json"), to_json(c));
      write_text(out.file("convergence_history.csv"), convergence_csv(sol.history, ic.n_e));
      write_text(out.file("solver_traces.csv"), traces_csv(sol.history));
      const Eigen::Index n_spec =
          c.benchmark == Benchmark::diffusion ? std::min<Eigen::Index>(a.n_vec(), 20) : a.n_vec();
      write_text(out.file("mean_spectrum.csv"), spectrum_csv(a.mean_eigen(static_cast<int>(n_spec)).values));
      const CoefficientDump dump = make_dump(sol);
      write_coefficients(out.file("eigen_coefficients.bin"), dump);
      write_json(out.file("eigen_coefficients.json"), dump_metadata(dump, c, m));

      json errors = problem_json(c, m, basis.size(), a.n_vec());
      errors["iterations"] = sol.iterations();
      errors["converged"] = sol.converged;
      errors["eps_theta"] = eps_last;
      json timings = problem_json(c, m, basis.size(), a.n_vec());
      timings["t_setup"] = t_setup;
      timings["t_solve"] = t_solve;
      timings["t_rayleigh"] = sol.rayleigh_seconds;
      std::vector<double> per_iteration;
      for (const auto& r : sol.history) per_iteration.push_back(r.seconds);
      timings["iteration_seconds"] = per_iteration;
      if (c.n_r > 0) {
        auto [e, t] = evaluate(c, sol, a, p, basis, m);
        errors.update(e);
        timings.update(t);
        log << "  eps_lambda (RR) =";
        for (double x : e["rayleigh_ritz"]["eps_lambda"]) log << ' ' << fmt(x);
        log << "\n  eps_u (RR) =";
        for (double x : e["rayleigh_ritz"]["eps_u"]) log << ' ' << fmt(x);
        log << "\n";
      }
      write_json(out.file("errors.json"), errors);
      write_json(out.file("timings.json"), timings);
      if (!sol.converged) {
        throw NumericalError("inverse subspace iteration did not reach tol_isi within " +
                             std::to_string(c.max_iterations) + " iterations (artifacts kept)");
      }
      return errors;
    });
  });
}

/// Full pipeline into a fresh output directory. Artifacts of a non-converged
/// run are still committed before the failure is reported.
inline json run(const ExperimentConfig& c, std::ostream& log) {
  c.validate();
  OutputDir out(c.output);
  try {
    json e = c.full_rank ? run_typed<lowrank::DenseCoefficients>(c, out, log)
                         : run_typed<lowrank::FactoredMatrix>(c, out, log);
    out.commit();
    return e;
  } catch (const NumericalError&) {
    if (fs::exists(out.file("errors.json"))) out.commit();
    throw;
  }
}

/// Reference-only Monte Carlo: per-sample eigenvalues and timing.
inline void run_mc(const ExperimentConfig& c, std::ostream& log) {
  c.validate();
  if (c.n_r < 1) throw ConfigError("mc needs n_r >= 1");
  OutputDir out(c.output);
  const randfield::KLExpansion kl = make_field(c);
  const int m = kl.size();
  const reference::SampleSet s = reference::make_samples(m, c.n_r, c.seed);
  with_problem(c, kl, [&](const auto& p) {
    const auto t0 = clock_type::now();
    const auto mc = reference::mc_eigensolve(p, s.points, c.eigen_count(), c.mc_tol, c.threads);
    const double t_mc = seconds_since(t0);
    std::ostringstream os;
    os << "sample";
    for (int l = 1; l <= m; ++l) os << ",xi_" << l;
    for (int k = 1; k <= c.eigen_count(); ++k) os << ",lambda_" << k;
    os << "\n";
    for (std::size_t r = 0; r < mc.size(); ++r) {
      os << r;
      for (int l = 0; l < m; ++l) os << ',' << fmt(s.points(l, static_cast<Eigen::Index>(r)));
      for (Eigen::Index k = 0; k < mc[r].values.size(); ++k) os << ',' << fmt(mc[r].values(k));
      os << "\n";
    }
    write_json(out.file("config.json"), to_json(c));
    write_text(out.file("mc_samples.csv"), os.str());
    json t = problem_json(c, m, 0, vector_size(p));
    t["t_mc"] = t_mc;
    write_json(out.file("timings.json"), t);
    log << "mc: " << c.n_r << " samples in " << t_mc << " s\n";
  });
  out.commit();
}

/// Re-evaluates a stored run against Monte Carlo, possibly on a different
/// sample set. `overrides` is applied on top of the stored configuration.
inline json run_compare(const fs::path& run_dir, const json& overrides, const fs::path& output, std::ostream& log) {
  ExperimentConfig c = load_config(run_dir / "config.json");
  apply_json(c, overrides);
  c.output = output.string();
  c.validate();
  if (c.n_r < 1) throw ConfigError("compare needs n_r >= 1");
  const CoefficientDump dump = read_coefficients(run_dir / "eigen_coefficients.bin");
  OutputDir out(c.output);
  const randfield::KLExpansion kl = make_field(c);
  const int m = kl.size();
  const chaos::ChaosBasis basis(m, c.p);
  if (dump.U.front().cols() != basis.size()) throw ConfigError("coefficient file does not match the configuration");
  iteration::EigenSolution<lowrank::FactoredMatrix> sol;
  sol.U = dump.U;
  sol.lambda = dump.lambda;
  sol.ritz = dump.ritz;
  json errors = with_problem(c, kl, [&](const auto& p) {
    if (dump.U.front().rows() != vector_size(p)) throw ConfigError("coefficient file does not match the grid");
    return with_adapter<lowrank::FactoredMatrix>(c, kl, p, basis, [&](const auto& a) {
      auto [e, t] = evaluate(c, sol, a, p, basis, m);
      json doc = problem_json(c, m, basis.size(), a.n_vec());
      doc.update(e);
      json tim = problem_json(c, m, basis.size(), a.n_vec());
      tim.update(t);
      write_json(out.file("config.json"), to_json(c));
      write_json(out.file("errors.json"), doc);
      write_json(out.file("timings.json"), tim);
      return doc;
    });
  });
  out.commit();
  log << "compare: " << c.n_r << " samples written to " << out.target().string() << "\n";
  return errors;
}

}  // namespace sglr::cli
