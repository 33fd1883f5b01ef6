#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tmcmc/discrete.hpp"
#include "tmcmc/error.hpp"
#include "tmcmc/verify.hpp"

namespace tmcmc {

// ---------------------------------------------------------------------------
// Continuous-kernel verification suites (db-check)

inline const std::vector<std::string>& db_suite_names() {
  static const std::vector<std::string> names{"grid", "dependent-z", "reachability", "leapfrog", "hmc-law", "all"};
  return names;
}

struct DbCheckOptions {
  std::string suite = "all";
  std::uint64_t seed = 1;
  std::size_t mc_size = kMinDependentZDraws;
  /// Debug switch: regular checks drop the move-ratio term from the
  /// acceptance probability. The suite must then report failures.
  bool corrupt_acceptance = false;
};

inline std::vector<Verdict> grid_suite(const DbCheckOptions& opt) {
  const Target target = make_iid_gaussian(1);
  const GridSpec grid;
  const Eigen::VectorXd pi = grid_masses(target, grid);
  const bool drop = opt.corrupt_acceptance;
  std::vector<Verdict> out;

  TmcmcConfig sym = TmcmcConfig::symmetric(1, 1.0);
  out.push_back(check_detailed_balance_discretized(additive_tmcmc_grid_kernel(target, grid, sym, drop), pi,
                                                   "grid-additive-tmcmc-symmetric"));
  TmcmcConfig skew = sym;
  skew.move_probs = {Vector{0.7}, Vector{0.3}};
  out.push_back(check_detailed_balance_discretized(additive_tmcmc_grid_kernel(target, grid, skew, drop), pi,
                                                   "grid-additive-tmcmc-asymmetric"));
  out.push_back(check_detailed_balance_discretized(rwmh_grid_kernel(target, grid, 1.0), pi, "grid-rwmh"));

  out.push_back(as_negative_control(check_detailed_balance_discretized(
      additive_tmcmc_grid_kernel(target, grid, skew, true), pi, "grid-additive-tmcmc-no-move-ratio")));
  out.push_back(as_negative_control(
      check_detailed_balance_discretized(rwmh_grid_kernel(target, grid, 1.0, 0.7), pi, "grid-rwmh-skewed-jumps")));
  return out;
}

inline DependentZConfig dependent_z_config(double mu1, double mu2, double mu3, double var) {
  DependentZConfig cfg;
  cfg.w1 = GaussianSpec::diagonal(Vector{mu1}, Vector{var});
  cfg.w2 = GaussianSpec::diagonal(Vector{mu2}, Vector{var});
  cfg.w3 = GaussianSpec::diagonal(Vector{mu3}, Vector{var});
  cfg.eps_scale = 1.0;
  cfg.scales = Vector{1.0};
  return cfg;
}

inline std::vector<Verdict> dependent_z_suite(const DbCheckOptions& opt) {
  const Target target = make_iid_gaussian(1);
  const GridSpec grid;
  std::vector<Verdict> out;
  Verdict degenerate = check_dependent_z_balance(target, grid, dependent_z_config(0.0, 0.0, 0.0, 1e-12), opt.mc_size,
                                                 opt.seed, opt.corrupt_acceptance);
  degenerate.check_name = "dependent-z-balance-degenerate";
  out.push_back(degenerate);
  Verdict generic = check_dependent_z_balance(target, grid, dependent_z_config(0.8, -0.4, 0.1, 0.5), opt.mc_size,
                                              opt.seed + 1, opt.corrupt_acceptance);
  generic.check_name = "dependent-z-balance-asymmetric";
  out.push_back(generic);
  Verdict control = check_dependent_z_balance(target, grid, dependent_z_config(0.8, -0.4, 0.1, 0.5), opt.mc_size,
                                              opt.seed + 1, true);
  control.check_name = "dependent-z-balance-no-move-ratio";
  out.push_back(as_negative_control(control));
  return out;
}

inline std::vector<Verdict> reachability_suite(const DbCheckOptions& opt) {
  ReachabilitySpec spec;
  spec.seed = opt.seed;
  return {check_two_step_reachability(spec)};
}

inline std::vector<Verdict> leapfrog_suite(const DbCheckOptions& opt) {
  LeapfrogCheckSpec spec;
  spec.seed = opt.seed;
  std::vector<Verdict> out;
  const Target iid = make_iid_gaussian(3);
  const Target aniso = make_anisotropic_gaussian({1.0, 4.0, 9.0});
  out.push_back(check_leapfrog_reversibility(iid, spec, leapfrog_integrator, "leapfrog-reversibility-iid"));
  out.push_back(check_leapfrog_reversibility(aniso, spec, leapfrog_integrator, "leapfrog-reversibility-anisotropic"));
  out.push_back(check_leapfrog_jacobian(iid, spec, leapfrog_integrator, "leapfrog-volume-iid"));
  out.push_back(check_leapfrog_jacobian(aniso, spec, leapfrog_integrator, "leapfrog-volume-anisotropic"));
  EnergyScalingSpec energy;
  energy.seed = opt.seed;
  out.push_back(check_energy_error_scaling(energy));
  out.push_back(as_negative_control(check_leapfrog_jacobian(iid, spec, euler_integrator, "euler-volume")));
  LeapfrogCheckSpec small = spec;
  small.n_points = 50;
  out.push_back(as_negative_control(check_leapfrog_reversibility(iid, small, euler_integrator, "euler-reversibility")));
  return out;
}

inline std::vector<Verdict> hmc_law_suite(const DbCheckOptions& opt) {
  const Target target = make_iid_gaussian(3);
  const HmcConfig cfg{1, 0.5, Vector{1.0, 2.0, 0.5}};
  return {check_hmc_one_step_law(target, Vector{1.0, -0.5, 2.0}, cfg, 100'000, opt.seed)};
}

inline std::vector<Verdict> run_db_suite(const DbCheckOptions& opt) {
  const auto& names = db_suite_names();
  if (std::find(names.begin(), names.end(), opt.suite) == names.end()) {
    throw ConfigError("suite", "unknown suite '" + opt.suite + "'");
  }
  std::vector<Verdict> out;
  auto add = [&](const std::vector<Verdict>& v) { out.insert(out.end(), v.begin(), v.end()); };
  const bool all = opt.suite == "all";
  if (all || opt.suite == "grid") add(grid_suite(opt));
  if (all || opt.suite == "dependent-z") add(dependent_z_suite(opt));
  if (all || opt.suite == "reachability") add(reachability_suite(opt));
  if (all || opt.suite == "leapfrog") add(leapfrog_suite(opt));
  if (all || opt.suite == "hmc-law") add(hmc_law_suite(opt));
  return out;
}

// ---------------------------------------------------------------------------
// Discrete-kernel suites (discrete-check)

struct DiscreteCheckOptions {
  bool ising = true;
  bool lattice = true;
  double coupling = 0.5;
  std::size_t max_ising_dim = 4;
  double rate = 0.7;
  double r = 0.3;            // mixture probability for the k = 2 lattice checks
  double jump_scale = 1.0;
  long box_radius = 3;       // k = 2 lattice box
  std::uint64_t seed = 1;
  bool corrupt_acceptance = false;

  void validate() const {
    if (max_ising_dim < 1 || max_ising_dim > 4) throw ConfigError("max_ising_dim", "must lie in [1, 4]");
    if (!(r >= 0.0 && r < 1.0)) throw ConfigError("r", "must lie in [0, 1)");
    if (!(rate > 0.0)) throw ConfigError("rate", "must be > 0");
    if (!(jump_scale > 0.0)) throw ConfigError("jump_scale", "must be > 0");
    if (box_radius < 1 || box_radius > 20) throw ConfigError("box_radius", "must lie in [1, 20]");
  }
};

/// Stationary vector of K from the null space of K' - I with sum 1.
inline Eigen::VectorXd stationary_vector(const Eigen::MatrixXd& k) {
  const Eigen::Index n = k.rows();
  Eigen::MatrixXd a(n + 1, n);
  a.topRows(n) = k.transpose() - Eigen::MatrixXd::Identity(n, n);
  a.row(n).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 1);
  b(n) = 1.0;
  return a.colPivHouseholderQr().solve(b);
}

/// Perturbs K_01 by delta and compensates on the diagonal (K stays stochastic).
inline Eigen::MatrixXd corrupt_matrix(Eigen::MatrixXd k, double delta = 1e-3) {
  if (k.rows() < 2) throw ConfigError("kernel", "need at least 2 states");
  const double moved = std::min(delta, k(0, 0));
  k(0, 1) += moved;
  k(0, 0) -= moved;
  return k;
}

inline std::vector<Verdict> ising_suite(const DiscreteCheckOptions& opt) {
  std::vector<Verdict> out;
  const Vector skewed_p{0.3, 0.6, 0.45, 0.7};
  const Vector eps_grid{1.5, 2.5, 4.0}, eps_weights{0.5, 0.3, 0.2};
  for (std::size_t k = 1; k <= opt.max_ising_dim; ++k) {
    const Target target = make_ising_chain(k, opt.coupling);
    const Eigen::VectorXd pi = ising_masses(target);
    const std::string tag = "ising-k" + std::to_string(k);
    const Vector half(k, 0.5);
    const Vector skew(skewed_p.begin(), skewed_p.begin() + static_cast<std::ptrdiff_t>(k));
    const Eigen::MatrixXd k_half =
        exact_transition_matrix(ising_finite_kernel(target, half, eps_grid, eps_weights, opt.corrupt_acceptance));
    const Eigen::MatrixXd k_skew =
        exact_transition_matrix(ising_finite_kernel(target, skew, eps_grid, eps_weights, opt.corrupt_acceptance));
    out.push_back(check_detailed_balance_exact(k_half, pi, tag + "-balance-symmetric"));
    out.push_back(check_detailed_balance_exact(k_skew, pi, tag + "-balance-asymmetric"));
    out.push_back(check_stationarity(k_skew, pi, tag + "-stationarity"));
    out.push_back(check_irreducible(k_skew, tag + "-irreducibility"));
    out.push_back(check_aperiodic_witness(k_skew, tag + "-aperiodicity"));

    // Each eps > 1 gives the same kernel, bit for bit.
    const Eigen::MatrixXd ref = exact_transition_matrix(ising_finite_kernel(target, skew, {1.0001}, {1.0}));
    double eps_diff = 0.0;
    for (double eps : {1.3, 2.0, 17.0}) {
      const Eigen::MatrixXd other = exact_transition_matrix(ising_finite_kernel(target, skew, {eps}, {1.0}));
      eps_diff = std::max(eps_diff, (other - ref).cwiseAbs().maxCoeff());
    }
    out.push_back(make_verdict(tag + "-eps-independence", eps_diff, 0.0));

    if (k == 3) {
      const double gap = (stationary_vector(k_half) - pi).cwiseAbs().maxCoeff();
      out.push_back(make_verdict(tag + "-stationary-vector", gap, 1e-12));
    }
    if (k >= 2) {
      const Eigen::MatrixXd no_ratio = exact_transition_matrix(ising_finite_kernel(target, skew, eps_grid, eps_weights, true));
      out.push_back(as_negative_control(check_detailed_balance_exact(no_ratio, pi, tag + "-balance-no-move-ratio")));
    }
  }
  const Target target = make_ising_chain(3, opt.coupling);
  const Eigen::MatrixXd k3 = exact_transition_matrix(ising_finite_kernel(target, Vector(3, 0.5), {2.0}, {1.0}));
  out.push_back(as_negative_control(
      check_detailed_balance_exact(corrupt_matrix(k3), ising_masses(target), "ising-k3-balance-corrupted-matrix")));
  return out;
}

/// Number of changes in the parity of x_1 - x_2 along a k = 2 lattice chain,
/// and whether both parity classes were visited.
struct ParityRun {
  std::size_t parity_changes = 0;
  bool visited_even = false;
  bool visited_odd = false;
  double accept_rate = 0.0;
};

inline ParityRun run_parity_chain(double r, double rate, double jump_scale, std::vector<long> start,
                                  std::size_t n_iter, std::uint64_t seed) {
  const Target target = make_lattice_target(2, rate);
  ZkConfig cfg{r, jump_scale};
  cfg.validate();
  LatticeState x{std::move(start)};
  Rng rng(seed);
  ParityRun run;
  auto parity = [](const LatticeState& s) { return ((s.coords[0] - s.coords[1]) % 2 + 2) % 2; };
  long last = parity(x);
  (last == 0 ? run.visited_even : run.visited_odd) = true;
  std::size_t accepted = 0;
  for (std::size_t t = 0; t < n_iter; ++t) {
    if (zk_tmcmc_step(x, target, cfg, rng).accepted) ++accepted;
    const long now = parity(x);
    if (now != last) ++run.parity_changes;
    (now == 0 ? run.visited_even : run.visited_odd) = true;
    last = now;
  }
  run.accept_rate = static_cast<double>(accepted) / static_cast<double>(n_iter);
  return run;
}

inline std::vector<Verdict> lattice_suite(const DiscreteCheckOptions& opt) {
  std::vector<Verdict> out;
  {
    // k = 1 on |x| <= 5, single-coordinate moves only.
    const Target target = make_lattice_target(1, opt.rate);
    const LatticeBox box(1, 5);
    const Eigen::MatrixXd k = exact_transition_matrix(zk_finite_kernel(target, box, ZkConfig{1.0, opt.jump_scale}));
    const Eigen::VectorXd pi = lattice_masses(target, box);
    out.push_back(check_detailed_balance_exact(k, pi, "lattice-k1-balance"));
    out.push_back(check_stationarity(k, pi, "lattice-k1-stationarity"));
    out.push_back(check_irreducible(k, "lattice-k1-irreducibility"));
    out.push_back(check_aperiodic_witness(k, "lattice-k1-aperiodicity"));
    out.push_back(as_negative_control(check_detailed_balance_exact(corrupt_matrix(k), pi, "lattice-k1-balance-corrupted-matrix")));
  }
  {
    const Target target = make_lattice_target(2, opt.rate);
    const LatticeBox box(2, opt.box_radius);
    const Eigen::MatrixXd k = exact_transition_matrix(zk_finite_kernel(target, box, ZkConfig{opt.r, opt.jump_scale}));
    const Eigen::VectorXd pi = lattice_masses(target, box);
    const std::string tag = "lattice-k2-r" + std::to_string(opt.r).substr(0, 4);
    out.push_back(check_detailed_balance_exact(k, pi, tag + "-balance"));
    out.push_back(check_stationarity(k, pi, tag + "-stationarity"));
    out.push_back(check_aperiodic_witness(k, tag + "-aperiodicity"));
    Verdict irreducible = check_irreducible(k, tag + "-irreducibility");
    if (opt.r == 0.0) {
      // Additive moves with one eps shift both coordinates by +-[eps], so the
      // parity of x_1 - x_2 never changes.
      irreducible.expected_failure = true;
      irreducible.details["finding"] = "parity of x_1 - x_2 is invariant; one class per parity";
    }
    out.push_back(irreducible);

    if (opt.r == 0.0) {
      const ParityRun run = run_parity_chain(0.0, opt.rate, opt.jump_scale, {1, 2}, 100'000, opt.seed);
      out.push_back(make_verdict("lattice-k2-r0-parity-invariant", static_cast<double>(run.parity_changes), 0.0,
                                 opt.seed, {{"iterations", 100'000}, {"accept_rate", run.accept_rate}}));
    } else {
      const ParityRun run = run_parity_chain(opt.r, opt.rate, opt.jump_scale, {1, 2}, 10'000, opt.seed);
      const double missing = (run.visited_even ? 0.0 : 1.0) + (run.visited_odd ? 0.0 : 1.0);
      out.push_back(make_verdict(tag + "-both-parities-visited", missing, 0.0, opt.seed,
                                 {{"iterations", 10'000}, {"parity_changes", run.parity_changes}}));
    }
  }
  return out;
}

inline std::vector<Verdict> run_discrete_suite(const DiscreteCheckOptions& opt) {
  opt.validate();
  std::vector<Verdict> out;
  if (opt.ising) {
    auto v = ising_suite(opt);
    out.insert(out.end(), v.begin(), v.end());
  }
  if (opt.lattice) {
    auto v = lattice_suite(opt);
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

}  // namespace tmcmc
