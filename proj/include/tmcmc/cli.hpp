#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tmcmc/baseline.hpp"
#include "tmcmc/benchmark.hpp"
#include "tmcmc/chain.hpp"
#include "tmcmc/challenger.hpp"
#include "tmcmc/diagnostics.hpp"
#include "tmcmc/discrete.hpp"
#include "tmcmc/parallel.hpp"
#include "tmcmc/scaling_study.hpp"
#include "tmcmc/suites.hpp"
#include "tmcmc/tmcmc_kernels.hpp"
#include "tmcmc/verify.hpp"

namespace tmcmc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr const char* kOutputDirEnv = "TMCMC_OUTPUT_DIR";

struct CommonOptions {
  std::uint64_t seed = 1;
  std::string output_dir = ".";
  std::size_t workers = default_workers();
  bool no_timing = false;
};

struct SampleOptions {
  std::string kernel = "additive-tmcmc";
  std::string target = "iid-gaussian";
  std::size_t dim = 10;
  std::vector<double> precisions;
  double prior_sd = 10.0;
  bool center = false;
  std::string data_path;
  std::size_t iters = 50'000;
  std::size_t burn_in = 0;
  std::size_t chains = 1;
  double x0 = 0.0;
  double eps_scale = 0.0;  // 0 = 2.4 / sqrt(dim)
  double p = 0.5;
  double q = 0.5;
  double sigma = 0.0;      // 0 = 2.38 / sqrt(dim)
  std::size_t leapfrog_steps = 10;
  double step_size = 0.1;
  double mass = 1.0;
  double mu1 = 0.0, mu2 = 0.0, mu3 = 0.0;
  double w_var = 1.0;
};

struct StudyOptions {
  std::vector<std::size_t> dims{10, 30, 100};
  std::vector<double> ell_grid = ScalingStudySpec{}.ell_grid;
  std::vector<std::string> kernels{"additive-tmcmc", "rwmh"};
  std::size_t iters = 200'000;
  std::size_t burn_in = 10'000;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4};
  std::size_t ess_coords = 10;
};

struct DiscreteOptions {
  bool ising = false;
  bool lattice = false;
  bool export_matrices = false;
};

namespace detail {

inline std::filesystem::path prepare_output_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("output_dir", "cannot create '" + dir + "': " + ec.message());
  const std::filesystem::path probe = std::filesystem::path(dir) / ".tmcmc_write_probe";
  {
    std::ofstream f(probe);
    if (!f) throw ConfigError("output_dir", "'" + dir + "' is not writable");
  }
  std::filesystem::remove(probe, ec);
  return dir;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("output_dir", "cannot write " + path.string());
  return f;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  auto f = open_output(path);
  f << j.dump(2) << '\n';
}

inline Target build_target(const SampleOptions& o) {
  if (o.target == "iid-gaussian") return make_iid_gaussian(o.dim);
  if (o.target == "anisotropic-gaussian") {
    if (o.precisions.empty()) throw ConfigError("precisions", "anisotropic-gaussian needs --precisions");
    return make_anisotropic_gaussian(o.precisions);
  }
  if (o.target == "challenger") {
    auto data = o.data_path.empty() ? challenger_data() : load_challenger_csv(o.data_path);
    return make_challenger_logistic(o.prior_sd, o.center, std::move(data));
  }
  throw ConfigError("target", "unknown target '" + o.target + "'");
}

inline Kernel build_kernel(const SampleOptions& o, const Target& target, nlohmann::json& params) {
  const std::size_t k = target.dim();
  const double root_k = std::sqrt(static_cast<double>(k));
  if (o.kernel == "additive-tmcmc" || o.kernel == "general-tmcmc") {
    TmcmcConfig cfg = TmcmcConfig::symmetric(k, o.eps_scale > 0.0 ? o.eps_scale : 2.4 / root_k);
    cfg.move_probs = {Vector(k, o.p), Vector(k, o.q)};
    params = {{"eps_scale", cfg.eps_scale}, {"p", o.p}, {"q", o.q}};
    if (o.kernel == "additive-tmcmc") return make_additive_tmcmc_kernel(target, cfg);
    return make_general_tmcmc_kernel(target, additive_transformation(cfg.scales), cfg);
  }
  if (o.kernel == "dependent-z") {
    DependentZConfig cfg;
    cfg.w1 = GaussianSpec::diagonal(Vector(k, o.mu1), Vector(k, o.w_var));
    cfg.w2 = GaussianSpec::diagonal(Vector(k, o.mu2), Vector(k, o.w_var));
    cfg.w3 = GaussianSpec::diagonal(Vector(k, o.mu3), Vector(k, o.w_var));
    cfg.eps_scale = o.eps_scale > 0.0 ? o.eps_scale : 2.4 / root_k;
    cfg.scales = Vector(k, 1.0);
    params = {{"eps_scale", cfg.eps_scale}, {"mu", {o.mu1, o.mu2, o.mu3}}, {"w_var", o.w_var}};
    return make_dependent_z_kernel(target, cfg);
  }
  if (o.kernel == "rwmh") {
    const double sigma = o.sigma > 0.0 ? o.sigma : 2.38 / root_k;
    params = {{"sigma", sigma}};
    return make_rwmh_kernel(target, RwmhConfig{sigma, {}});
  }
  if (o.kernel == "hmc") {
    params = {{"leapfrog_steps", o.leapfrog_steps}, {"step_size", o.step_size}, {"mass", o.mass}};
    return make_hmc_kernel(target, HmcConfig{o.leapfrog_steps, o.step_size, Vector(k, o.mass)});
  }
  throw ConfigError("kernel", "unknown kernel '" + o.kernel + "'");
}

inline void print_verdicts(std::ostream& out, const std::vector<Verdict>& verdicts) {
  out << std::left << std::setw(46) << "check" << std::setw(8) << "result" << std::setw(14) << "violation"
      << "tolerance\n";
  for (const auto& v : verdicts) {
    std::string status = v.passed ? "pass" : "FAIL";
    if (v.negative_control) status += v.passed ? " (control blind!)" : " (control)";
    if (v.expected_failure) status += " (expected)";
    std::ostringstream viol;
    viol << std::setprecision(3) << v.max_violation;
    out << std::setw(46) << v.check_name << std::setw(8) << status.substr(0, 4) << std::setw(14) << viol.str()
        << v.tolerance;
    if (status.size() > 4) out << "  " << status.substr(5);
    out << '\n';
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Subcommands

inline int cmd_sample(const SampleOptions& o, const CommonOptions& c) {
  if (o.chains < 1) throw ConfigError("chains", "must be at least 1");
  if (o.burn_in >= o.iters) throw ConfigError("burn_in", "must be smaller than iters");
  if (o.iters - o.burn_in < kMinIactLength) throw ConfigError("iters", "need at least 100 draws after burn-in");
  const Target target = detail::build_target(o);
  nlohmann::json params;
  const Kernel kernel = detail::build_kernel(o, target, params);
  const auto dir = detail::prepare_output_dir(c.output_dir);

  std::vector<Trace> traces(o.chains);
  RunOptions run;
  run.time = !c.no_timing;
  parallel_for(o.chains, c.workers, [&](std::size_t i) {
    traces[i] = run_chain(kernel, target, Vector(target.dim(), o.x0), o.iters, derive_seed(c.seed, i), run);
  });

  nlohmann::json chains = nlohmann::json::array();
  Vector ess_total(target.dim(), 0.0);
  double accept_sum = 0.0, wall = 0.0;
  for (std::size_t i = 0; i < o.chains; ++i) {
    const std::string name = "trace_chain" + std::to_string(i) + ".csv";
    auto f = detail::open_output(dir / name);
    write_trace_csv(f, traces[i]);
    Vector ess(target.dim());
    for (std::size_t d = 0; d < target.dim(); ++d) ess[d] = iact_and_ess(traces[i].series(d, o.burn_in)).ess;
    for (std::size_t d = 0; d < target.dim(); ++d) ess_total[d] += ess[d];
    const double ar = acceptance_rate(traces[i], o.burn_in);
    accept_sum += ar;
    wall += traces[i].wall_ms;
    chains.push_back({{"chain", i},
                      {"seed", traces[i].seed},
                      {"trace", name},
                      {"accept_rate", ar},
                      {"ess", ess},
                      {"nonfinite_proposals", traces[i].nonfinite_proposals},
                      {"wall_ms", traces[i].wall_ms}});
  }
  nlohmann::json summary = {
      {"command", "sample"},
      {"seed", c.seed},
      {"config",
       {{"kernel", o.kernel},
        {"target", target.name()},
        {"dim", target.dim()},
        {"iters", o.iters},
        {"burn_in", o.burn_in},
        {"chains", o.chains},
        {"x0", o.x0},
        {"params", params}}},
      {"accept_rate", accept_sum / static_cast<double>(o.chains)},
      {"ess_per_coordinate", ess_total},
      {"wall_ms", wall},
      {"chain_runs", chains}};
  detail::write_json(dir / "summary.json", summary);
  std::cout << "sample: " << o.chains << " chain(s), acceptance " << summary["accept_rate"].get<double>() << ", wrote "
            << (dir / "summary.json").string() << '\n';
  return kExitOk;
}

inline int cmd_scaling_study(const StudyOptions& o, const CommonOptions& c) {
  ScalingStudySpec spec;
  spec.dims = o.dims;
  spec.ell_grid = o.ell_grid;
  spec.kernels.clear();
  for (const auto& k : o.kernels) {
    if (k == "additive-tmcmc") spec.kernels.push_back(StudyKernel::additive_tmcmc);
    else if (k == "rwmh") spec.kernels.push_back(StudyKernel::rwmh);
    else throw ConfigError("kernels", "unknown study kernel '" + k + "'");
  }
  spec.n_iter = o.iters;
  spec.burn_in = o.burn_in;
  spec.seeds = o.seeds;
  spec.ess_coords = o.ess_coords;
  spec.workers = c.workers;
  spec.time = !c.no_timing;
  spec.validate();
  const auto dir = detail::prepare_output_dir(c.output_dir);
  const StudyReport report = run_scaling_study(spec);
  {
    auto f = detail::open_output(dir / "study.csv");
    write_study_csv(f, report);
  }
  {
    auto f = detail::open_output(dir / "study_long.csv");
    write_study_long_csv(f, report);
  }
  nlohmann::json optimal = nlohmann::json::array();
  for (const auto& r : report.optimal) {
    optimal.push_back({{"kernel", to_string(r.kernel)},
                       {"k", r.k},
                       {"ell_star", r.ell_star},
                       {"accept_rate", r.accept_rate},
                       {"accept_se", r.accept_se},
                       {"ess_per_iter", r.ess_per_iter},
                       {"grid_ell", r.grid_ell},
                       {"grid_accept_rate", r.grid_accept_rate}});
  }
  nlohmann::json summary = {{"command", "scaling-study"},
                            {"config",
                             {{"dims", spec.dims},
                              {"ell_grid", spec.ell_grid},
                              {"kernels", o.kernels},
                              {"iters", spec.n_iter},
                              {"burn_in", spec.burn_in},
                              {"seeds", spec.seeds},
                              {"ess_coords", spec.ess_coords}}},
                            {"partial", report.partial},
                            {"error", report.error},
                            {"optimal", optimal}};
  detail::write_json(dir / "study_summary.json", summary);
  for (const auto& r : report.optimal) {
    std::cout << to_string(r.kernel) << " k=" << r.k << " ell*=" << r.ell_star << " accept=" << r.accept_rate
              << " (se " << r.accept_se << ")\n";
  }
  if (report.partial) {
    std::cerr << "error: study aborted: " << report.error << '\n';
    return kExitCheckFailed;
  }
  return kExitOk;
}

inline int emit_verdicts(const std::vector<Verdict>& verdicts, const std::filesystem::path& path) {
  detail::write_json(path, to_json(verdicts));
  detail::print_verdicts(std::cout, verdicts);
  const bool failed = any_error(verdicts);
  std::cout << (failed ? "FAILED" : "OK") << ": " << verdicts.size() << " checks, verdicts in " << path.string()
            << '\n';
  return failed ? kExitCheckFailed : kExitOk;
}

inline int cmd_db_check(DbCheckOptions o, const CommonOptions& c) {
  o.seed = c.seed;
  const auto dir = detail::prepare_output_dir(c.output_dir);
  return emit_verdicts(run_db_suite(o), dir / "db_check_verdicts.json");
}

inline int cmd_discrete_check(DiscreteCheckOptions o, const DiscreteOptions& d, const CommonOptions& c) {
  if (d.ising || d.lattice) {
    o.ising = d.ising;
    o.lattice = d.lattice;
  }
  o.seed = c.seed;
  o.validate();
  const auto dir = detail::prepare_output_dir(c.output_dir);
  if (d.export_matrices) {
    if (o.ising) {
      const Target t = make_ising_chain(o.max_ising_dim, o.coupling);
      auto f = detail::open_output(dir / "ising_matrix.csv");
      write_matrix_csv(f, exact_transition_matrix(ising_finite_kernel(t, Vector(o.max_ising_dim, 0.5), {2.0}, {1.0})));
    }
    if (o.lattice) {
      const Target t = make_lattice_target(2, o.rate);
      auto f = detail::open_output(dir / "lattice_matrix.csv");
      write_matrix_csv(f, exact_transition_matrix(zk_finite_kernel(t, LatticeBox(2, o.box_radius), ZkConfig{o.r, o.jump_scale})));
    }
  }
  return emit_verdicts(run_discrete_suite(o), dir / "discrete_check_verdicts.json");
}

inline int cmd_challenger(ChallengerSpec spec, const std::string& data_path, const CommonOptions& c) {
  if (!data_path.empty()) spec.data = load_challenger_csv(data_path);
  spec.seed = c.seed;
  spec.workers = c.workers;
  spec.time = !c.no_timing;
  const auto dir = detail::prepare_output_dir(c.output_dir);
  const ChallengerReport report = run_challenger(spec);
  nlohmann::json j = to_json(report, spec);
  j["command"] = "challenger";
  detail::write_json(dir / "challenger_summary.json", j);
  for (const auto* k : {&report.tmcmc, &report.rwmh}) {
    std::cout << std::left << std::setw(16) << k->kernel;
    for (std::size_t p = 0; p < 2; ++p) {
      std::cout << " beta" << p << " mean=" << k->params[p].mean << " se=" << k->params[p].se
                << " rhat=" << k->params[p].rhat;
    }
    std::cout << '\n';
  }
  if (report.disagreement) {
    std::cerr << "warning: kernel posterior means differ by more than 3 combined standard errors\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// Front end

inline void add_common(CLI::App* sub, CommonOptions& c) {
  sub->add_option("--seed", c.seed, "Run seed (64-bit unsigned)")->capture_default_str();
  sub->add_option("--output-dir", c.output_dir, "Output directory")
      ->envname(kOutputDirEnv)
      ->capture_default_str();
  sub->add_option("--workers", c.workers, "Worker threads")->check(CLI::Range(std::size_t{1}, std::size_t{256}))
      ->capture_default_str();
  sub->add_flag("--no-timing", c.no_timing, "Write wall times as 0 (byte-identical reruns)");
}

/// Parses argv and runs one subcommand. Returns the process exit status:
/// 0 success (also --help), 1 failed checks, 2 invalid configuration.
inline int run(int argc, const char* const* argv, std::ostream& err = std::cerr) {
  CLI::App app{"Transformation-based MCMC samplers, baselines and verification harness", "tmcmc"};
  app.set_config("--config", "", "TOML/INI config file with one [subcommand] section; flags take precedence");
  app.require_subcommand(1);
  app.allow_config_extras(CLI::config_extras_mode::error);

  CommonOptions common;
  SampleOptions s;
  auto* sample = app.add_subcommand("sample", "Run chains and write traces plus a summary");
  sample->add_option("--kernel", s.kernel, "Kernel")
      ->check(CLI::IsMember({"additive-tmcmc", "general-tmcmc", "dependent-z", "rwmh", "hmc"}))
      ->capture_default_str();
  sample->add_option("--target", s.target, "Target")
      ->check(CLI::IsMember({"iid-gaussian", "anisotropic-gaussian", "challenger"}))
      ->capture_default_str();
  sample->add_option("--dim", s.dim, "Dimension k (iid-gaussian)")
      ->check(CLI::Range(std::size_t{1}, std::size_t{100'000}))
      ->capture_default_str();
  sample->add_option("--precisions", s.precisions, "Comma-separated precisions, each > 0")->delimiter(',');
  sample->add_option("--prior-sd", s.prior_sd, "Challenger prior SD")->check(CLI::PositiveNumber)->capture_default_str();
  sample->add_flag("--center", s.center, "Center the Challenger temperature covariate");
  sample->add_option("--data", s.data_path, "Challenger CSV (flight_no,failure,temp_f)");
  sample->add_option("--iters", s.iters, "Iterations per chain")
      ->check(CLI::Range(std::size_t{100}, std::size_t{100'000'000}))
      ->capture_default_str();
  sample->add_option("--burn-in", s.burn_in, "Burn-in iterations, < iters")->capture_default_str();
  sample->add_option("--chains", s.chains, "Number of chains")
      ->check(CLI::Range(std::size_t{1}, std::size_t{1024}))
      ->capture_default_str();
  sample->add_option("--x0", s.x0, "Initial value of every coordinate")->capture_default_str();
  sample->add_option("--eps-scale", s.eps_scale, "TMCMC eps scale s > 0 (0 = 2.4/sqrt(k))")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sample->add_option("--p", s.p, "Forward move probability in [0,1]")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  sample->add_option("--q", s.q, "Backward move probability in [0,1], p+q <= 1")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  sample->add_option("--sigma", s.sigma, "RWMH scale > 0 (0 = 2.38/sqrt(k))")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sample->add_option("--leapfrog-steps", s.leapfrog_steps, "HMC leapfrog steps L")
      ->check(CLI::Range(std::size_t{1}, std::size_t{10'000}))
      ->capture_default_str();
  sample->add_option("--step-size", s.step_size, "HMC step size dt > 0")->check(CLI::PositiveNumber)->capture_default_str();
  sample->add_option("--mass", s.mass, "HMC diagonal mass > 0")->check(CLI::PositiveNumber)->capture_default_str();
  sample->add_option("--mu1", s.mu1, "Dependent-z mean of w_1")->capture_default_str();
  sample->add_option("--mu2", s.mu2, "Dependent-z mean of w_2")->capture_default_str();
  sample->add_option("--mu3", s.mu3, "Dependent-z mean of w_3")->capture_default_str();
  sample->add_option("--w-var", s.w_var, "Dependent-z variance of w_j > 0")->check(CLI::PositiveNumber)->capture_default_str();
  add_common(sample, common);

  StudyOptions st;
  auto* study = app.add_subcommand("scaling-study", "Optimal-acceptance scaling study on iid Gaussians");
  study->add_option("--dims", st.dims, "Comma-separated dimensions, each >= 1")
      ->delimiter(',')
      ->check(CLI::Range(std::size_t{1}, std::size_t{100'000}))
      ->capture_default_str();
  study->add_option("--ell-grid", st.ell_grid, "Comma-separated increasing ell > 0 (scale = ell/sqrt(k))")
      ->delimiter(',')
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  study->add_option("--kernels", st.kernels, "Comma-separated kernels")
      ->delimiter(',')
      ->check(CLI::IsMember({"additive-tmcmc", "rwmh"}))
      ->capture_default_str();
  study->add_option("--iters", st.iters, "Iterations per cell")
      ->check(CLI::Range(std::size_t{200}, std::size_t{100'000'000}))
      ->capture_default_str();
  study->add_option("--burn-in", st.burn_in, "Burn-in per cell, < iters")->capture_default_str();
  study->add_option("--seeds", st.seeds, "Comma-separated seeds")->delimiter(',')->capture_default_str();
  study->add_option("--ess-coords", st.ess_coords, "Coordinates averaged for ESS")
      ->check(CLI::Range(std::size_t{1}, std::size_t{1000}))
      ->capture_default_str();
  add_common(study, common);

  DbCheckOptions db;
  auto* dbc = app.add_subcommand("db-check", "Detailed-balance, reachability and leapfrog verification suites");
  dbc->add_option("--suite", db.suite, "Suite")->check(CLI::IsMember(db_suite_names()))->capture_default_str();
  dbc->add_option("--mc-size", db.mc_size, "Dependent-z Monte Carlo draws (>= 100000)")
      ->check(CLI::Range(kMinDependentZDraws, std::size_t{100'000'000}))
      ->capture_default_str();
  dbc->add_flag("--debug-corrupt-acceptance", db.corrupt_acceptance, "Drop the move ratio (negative control)");
  add_common(dbc, common);

  DiscreteCheckOptions dk;
  DiscreteOptions dsel;
  auto* disc = app.add_subcommand("discrete-check", "Exact-matrix checks for the Ising and Z^k kernels");
  disc->add_flag("--ising", dsel.ising, "Run the Ising checks (default: both families)");
  disc->add_flag("--lattice", dsel.lattice, "Run the lattice checks (default: both families)");
  disc->add_option("--r", dk.r, "Lattice single-coordinate move probability in [0,1)")
      ->check(CLI::Range(0.0, 0.999999))
      ->capture_default_str();
  disc->add_option("--coupling", dk.coupling, "Ising coupling")->capture_default_str();
  disc->add_option("--max-ising-dim", dk.max_ising_dim, "Largest Ising k checked")
      ->check(CLI::Range(std::size_t{1}, std::size_t{4}))
      ->capture_default_str();
  disc->add_option("--rate", dk.rate, "Lattice target rate > 0")->check(CLI::PositiveNumber)->capture_default_str();
  disc->add_option("--jump-scale", dk.jump_scale, "Lattice eps scale s > 0")->check(CLI::PositiveNumber)->capture_default_str();
  disc->add_option("--box-radius", dk.box_radius, "k=2 lattice box radius")
      ->check(CLI::Range(1L, 20L))
      ->capture_default_str();
  disc->add_flag("--export-matrices", dsel.export_matrices, "Write exact transition matrices as CSV");
  disc->add_flag("--debug-corrupt-acceptance", dk.corrupt_acceptance, "Drop the move ratio (negative control)");
  add_common(disc, common);

  ChallengerSpec ch;
  std::string ch_data;
  auto* chal = app.add_subcommand("challenger", "Challenger logistic-regression benchmark (TMCMC vs RWMH)");
  chal->add_option("--prior-sd", ch.prior_sd, "Prior SD > 0")->check(CLI::PositiveNumber)->capture_default_str();
  chal->add_flag("--center", ch.center, "Center the temperature covariate");
  chal->add_option("--chains", ch.n_chains, "Chains per kernel")
      ->check(CLI::Range(std::size_t{2}, std::size_t{256}))
      ->capture_default_str();
  chal->add_option("--iters", ch.n_iter, "Iterations per chain")
      ->check(CLI::Range(std::size_t{200}, std::size_t{100'000'000}))
      ->capture_default_str();
  chal->add_option("--burn-frac", ch.burn_frac, "Burn-in fraction in [0,0.9]")->check(CLI::Range(0.0, 0.9))->capture_default_str();
  chal->add_option("--eps-scale", ch.tmcmc_eps_scale, "TMCMC eps scale (posterior-SD units) > 0")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  chal->add_option("--sigma", ch.rwmh_sigma, "RWMH scale (posterior-SD units) > 0")->check(CLI::PositiveNumber)->capture_default_str();
  chal->add_option("--data", ch_data, "Challenger CSV (flight_no,failure,temp_f)");
  add_common(chal, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e, std::cout, err);
    return kExitConfig;
  }

  try {
    if (*sample) return cmd_sample(s, common);
    if (*study) return cmd_scaling_study(st, common);
    if (*dbc) return cmd_db_check(db, common);
    if (*disc) return cmd_discrete_check(dk, dsel, common);
    if (*chal) return cmd_challenger(ch, ch_data, common);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitCheckFailed;
  }
  return kExitConfig;
}

}  // namespace tmcmc::cli
