#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "tmcmc/baseline.hpp"
#include "tmcmc/chain.hpp"
#include "tmcmc/discrete.hpp"
#include "tmcmc/error.hpp"
#include "tmcmc/rng.hpp"
#include "tmcmc/step.hpp"
#include "tmcmc/target.hpp"
#include "tmcmc/tmcmc_kernels.hpp"
#include "tmcmc/transform.hpp"

namespace tmcmc {

// ---------------------------------------------------------------------------
// Verdicts

struct Verdict {
  std::string check_name;
  bool passed = false;
  double max_violation = 0.0;
  double tolerance = 0.0;
  std::uint64_t seed = 0;
  /// The check is built to fail; a pass means the harness is blind.
  bool negative_control = false;
  /// A documented failure (e.g. a reducible kernel) that is reported, not an error.
  bool expected_failure = false;
  nlohmann::json details = nlohmann::json::object();

  /// Counts against the exit status only when it is a regular check that failed.
  bool is_error() const { return !passed && !negative_control && !expected_failure; }
};

inline Verdict make_verdict(std::string name, double violation, double tolerance, std::uint64_t seed = 0,
                            nlohmann::json details = nlohmann::json::object()) {
  Verdict v;
  v.check_name = std::move(name);
  v.max_violation = violation;
  v.tolerance = tolerance;
  v.passed = violation <= tolerance;
  v.seed = seed;
  v.details = std::move(details);
  return v;
}

inline Verdict as_negative_control(Verdict v) {
  v.negative_control = true;
  return v;
}

inline nlohmann::json to_json(const Verdict& v) {
  nlohmann::json j;
  j["check_name"] = v.check_name;
  j["passed"] = v.passed;
  j["max_violation"] = std::isfinite(v.max_violation) ? nlohmann::json(v.max_violation) : nlohmann::json("inf");
  j["tolerance"] = v.tolerance;
  j["seed"] = v.seed;
  j["negative_control"] = v.negative_control;
  j["expected_failure"] = v.expected_failure;
  j["details"] = v.details;
  return j;
}

inline nlohmann::json to_json(const std::vector<Verdict>& verdicts) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& v : verdicts) arr.push_back(to_json(v));
  return arr;
}

inline bool any_error(const std::vector<Verdict>& verdicts) {
  return std::any_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.is_error(); });
}

// ---------------------------------------------------------------------------
// Exact matrix checks

inline constexpr double kDetailedBalanceTolerance = 1e-10;
inline constexpr double kEdgeThreshold = 1e-14;

namespace detail {

inline void require_stochastic(const Eigen::MatrixXd& k, const Eigen::VectorXd& pi) {
  if (k.rows() != k.cols() || k.rows() != pi.size() || k.rows() == 0) {
    throw ConfigError("kernel", "need a square matrix matching the target masses");
  }
  for (Eigen::Index i = 0; i < k.rows(); ++i) {
    if (std::fabs(k.row(i).sum() - 1.0) > 1e-9 || k.row(i).minCoeff() < -1e-15) {
      throw ConfigError("kernel", "row " + std::to_string(i) + " is not a probability vector");
    }
  }
  if (pi.minCoeff() <= 0.0 || std::fabs(pi.sum() - 1.0) > 1e-9) {
    throw ConfigError("pi", "target masses must be positive and sum to 1");
  }
}

}  // namespace detail

/// max_ij |pi_i K_ij - pi_j K_ji|.
inline Verdict check_detailed_balance_exact(const Eigen::MatrixXd& k, const Eigen::VectorXd& pi,
                                            std::string name = "detailed-balance-exact",
                                            double tolerance = kDetailedBalanceTolerance) {
  detail::require_stochastic(k, pi);
  const Eigen::MatrixXd flow = pi.asDiagonal() * k;
  const Eigen::MatrixXd diff = (flow - flow.transpose()).cwiseAbs();
  Eigen::Index bi = 0, bj = 0;
  const double worst = diff.maxCoeff(&bi, &bj);
  return make_verdict(std::move(name), worst, tolerance, 0,
                      {{"states", k.rows()}, {"worst_pair", {bi, bj}}});
}

/// max_j |(pi K)_j - pi_j|.
inline Verdict check_stationarity(const Eigen::MatrixXd& k, const Eigen::VectorXd& pi,
                                  std::string name = "stationarity", double tolerance = kDetailedBalanceTolerance) {
  detail::require_stochastic(k, pi);
  const Eigen::VectorXd moved = k.transpose() * pi;
  return make_verdict(std::move(name), (moved - pi).cwiseAbs().maxCoeff(), tolerance, 0, {{"states", k.rows()}});
}

/// Strongly connected components of the graph with edges K_ij > threshold.
/// Returns a component label per state; labels are 0..n_components-1 in order
/// of the smallest member.
inline std::vector<int> strongly_connected_components(const Eigen::MatrixXd& k, double threshold = kEdgeThreshold) {
  const auto n = static_cast<std::size_t>(k.rows());
  auto reach = [&](std::size_t start, bool forward) {
    std::vector<char> seen(n, 0);
    std::vector<std::size_t> stack{start};
    seen[start] = 1;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      for (std::size_t w = 0; w < n; ++w) {
        const double edge = forward ? k(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(w))
                                    : k(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(v));
        if (!seen[w] && edge > threshold) {
          seen[w] = 1;
          stack.push_back(w);
        }
      }
    }
    return seen;
  };
  std::vector<int> label(n, -1);
  int next = 0;
  for (std::size_t v = 0; v < n; ++v) {
    if (label[v] >= 0) continue;
    const auto fwd = reach(v, true);
    const auto bwd = reach(v, false);
    for (std::size_t w = 0; w < n; ++w) {
      if (fwd[w] && bwd[w]) label[w] = next;
    }
    ++next;
  }
  return label;
}

inline int component_count(const std::vector<int>& labels) {
  return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
}

/// Passes when the transition graph is a single strongly connected component.
/// The violation is the number of extra components.
inline Verdict check_irreducible(const Eigen::MatrixXd& k, std::string name = "irreducibility") {
  const auto labels = strongly_connected_components(k);
  const int count = component_count(labels);
  std::vector<std::size_t> sizes(static_cast<std::size_t>(count), 0);
  for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
  return make_verdict(std::move(name), count - 1, 0.0, 0, {{"components", count}, {"component_sizes", sizes}});
}

/// Aperiodicity witness: some state keeps positive mass on itself.
inline Verdict check_aperiodic_witness(const Eigen::MatrixXd& k, std::string name = "aperiodicity-witness") {
  const double best = k.diagonal().maxCoeff();
  return make_verdict(std::move(name), best > kEdgeThreshold ? 0.0 : 1.0, 0.0, 0, {{"max_self_transition", best}});
}

// ---------------------------------------------------------------------------
// Grid surrogates of the continuous kernels

/// A 1-D grid x_j = lo + j h, j < n_points. Jumps are multiples m h of the
/// spacing, m = 1..n_points-1.
struct GridSpec {
  std::size_t n_points = 25;
  double lo = -3.0;
  double h = 0.25;

  void validate() const {
    if (n_points < 2 || n_points > 30) throw ConfigError("grid", "need 2 to 30 grid points");
    if (!(h > 0.0) || !std::isfinite(lo)) throw ConfigError("grid", "spacing must be > 0");
  }
  double point(std::size_t j) const { return lo + static_cast<double>(j) * h; }

  /// Index of y on the grid, nullopt off the grid range; throws when y is not
  /// a grid point.
  std::optional<std::size_t> locate(double y) const {
    const double t = (y - lo) / h;
    const double r = std::round(t);
    if (std::fabs(t - r) > 1e-9) throw ConfigError("grid", "jump is not a multiple of the spacing");
    if (r < 0.0 || r >= static_cast<double>(n_points)) return std::nullopt;
    return static_cast<std::size_t>(r);
  }
};

inline Eigen::VectorXd grid_masses(const Target& target, const GridSpec& grid) {
  grid.validate();
  return normalized_masses(target, grid.n_points, [&](std::size_t j) { return Vector{grid.point(j)}; });
}

/// Half-normal weights g(eps_m) at eps_m = m h / a, normalized over m = 1..n-1.
inline Vector grid_eps_weights(const GridSpec& grid, double eps_scale, double a) {
  Vector w(grid.n_points - 1);
  double total = 0.0;
  for (std::size_t m = 1; m < grid.n_points; ++m) {
    const double eps = static_cast<double>(m) * grid.h / a;
    w[m - 1] = std::exp(-0.5 * eps * eps / (eps_scale * eps_scale));
    total += w[m - 1];
  }
  for (double& v : w) v /= total;
  return w;
}

/// Additive TMCMC restricted to a 1-D grid: eps takes the values m h / a with
/// half-normal weights, z = +1 w.p. p and -1 w.p. 1 - p. Uses the same
/// forward map, move ratio and acceptance rule as the continuous kernel.
inline FiniteKernel additive_tmcmc_grid_kernel(const Target& target, const GridSpec& grid, const TmcmcConfig& cfg,
                                               bool drop_move_ratio = false) {
  grid.validate();
  if (target.dim() != 1) throw ConfigError("dim", "grid surrogate is one-dimensional");
  cfg.validate(1);
  const Vector w = grid_eps_weights(grid, cfg.eps_scale, cfg.scales[0]);
  FiniteKernel fk;
  fk.n_states = grid.n_points;
  fk.branches = [=](std::size_t i, std::vector<ProposalBranch>& out) {
    const Vector x{grid.point(i)};
    const double lp_x = target.log_density(x);
    for (int sign : {1, -1}) {
      const MoveType z(std::vector<std::int8_t>{static_cast<std::int8_t>(sign)});
      const double pz = cfg.move_probs.prob(0, sign);
      if (pz <= 0.0) continue;
      const double ratio = drop_move_ratio ? 0.0 : log_move_ratio(z, cfg.move_probs);
      for (std::size_t m = 1; m < grid.n_points; ++m) {
        const double eps = static_cast<double>(m) * grid.h / cfg.scales[0];
        const Vector y = additive_forward(x, eps, z, cfg.scales);
        const auto j = grid.locate(y[0]);
        if (!j) {
          out.push_back({std::nullopt, pz * w[m - 1], kNegInf});
          continue;
        }
        out.push_back({*j, pz * w[m - 1], mh_log_alpha(lp_x, target.log_density(y), ratio)});
      }
    }
  };
  return fk;
}

/// RWMH restricted to a 1-D grid: jumps +-m h with weights proportional to
/// phi(m h / sigma); `up_weight` splits the mass between up and down jumps
/// (0.5 is the symmetric kernel).
inline FiniteKernel rwmh_grid_kernel(const Target& target, const GridSpec& grid, double sigma,
                                     double up_weight = 0.5) {
  grid.validate();
  if (target.dim() != 1) throw ConfigError("dim", "grid surrogate is one-dimensional");
  if (!(sigma > 0.0)) throw ConfigError("sigma", "must be > 0");
  if (!(up_weight > 0.0 && up_weight < 1.0)) throw ConfigError("up_weight", "must lie in (0, 1)");
  const Vector w = grid_eps_weights(grid, sigma, 1.0);
  FiniteKernel fk;
  fk.n_states = grid.n_points;
  fk.branches = [=](std::size_t i, std::vector<ProposalBranch>& out) {
    const double lp_x = target.log_density(Vector{grid.point(i)});
    for (int sign : {1, -1}) {
      const double side = sign > 0 ? up_weight : 1.0 - up_weight;
      for (std::size_t m = 1; m < grid.n_points; ++m) {
        const Vector y{grid.point(i) + sign * static_cast<double>(m) * grid.h};
        const auto j = grid.locate(y[0]);
        if (!j) {
          out.push_back({std::nullopt, side * w[m - 1], kNegInf});
          continue;
        }
        out.push_back({*j, side * w[m - 1], mh_log_alpha(lp_x, target.log_density(y))});
      }
    }
  };
  return fk;
}

inline Verdict check_detailed_balance_discretized(const FiniteKernel& kernel, const Eigen::VectorXd& pi,
                                                  std::string name) {
  return check_detailed_balance_exact(exact_transition_matrix(kernel), pi, std::move(name));
}

// ---------------------------------------------------------------------------
// Dependent-z balance by Monte Carlo over (w1, w2, w3)

inline constexpr std::size_t kMinDependentZDraws = 100'000;
inline constexpr double kDependentZFloor = 1e-12;

/// For each draw of (w1, w2, w3) the 1-D grid kernel given (p, q) is exact:
/// z = +1 w.p. p/(p+q), -1 w.p. q/(p+q) (z = 0 is resampled). The flux
/// difference d_ij(w) = pi_i K_ij(w) - pi_j K_ji(w) is averaged over draws;
/// a pair violates balance by max(0, |mean| - 4 SE). The violation is
/// compared against a 1e-12 floor.
inline Verdict check_dependent_z_balance(const Target& target, const GridSpec& grid, const DependentZConfig& cfg,
                                         std::size_t mc_size, std::uint64_t seed, bool drop_move_ratio = false) {
  grid.validate();
  if (target.dim() != 1) throw ConfigError("dim", "grid surrogate is one-dimensional");
  cfg.validate(1);
  if (mc_size < kMinDependentZDraws) throw ConfigError("mc_size", "need at least 100000 Monte Carlo draws");
  const Eigen::VectorXd pi = grid_masses(target, grid);
  const Vector w = grid_eps_weights(grid, cfg.eps_scale, cfg.scales[0]);
  const std::size_t n = grid.n_points;
  Vector lp(n);
  for (std::size_t i = 0; i < n; ++i) lp[i] = target.log_density(Vector{grid.point(i)});

  const MoveType up(std::vector<std::int8_t>{1}), down(std::vector<std::int8_t>{-1});
  // Welford accumulators over pairs i < j.
  const std::size_t n_pairs = n * (n - 1) / 2;
  std::vector<double> mean(n_pairs, 0.0), m2(n_pairs, 0.0);
  Rng rng(seed);
  Vector w1(1), w2(1), w3(1);
  for (std::size_t t = 0; t < mc_size; ++t) {
    cfg.w1.sample(rng, w1);
    cfg.w2.sample(rng, w2);
    cfg.w3.sample(rng, w3);
    const MoveProbabilities probs = softmax_move_probabilities(w1, w2, w3);
    const double p = probs.forward[0], q = probs.backward[0];
    const double r_up = drop_move_ratio ? 0.0 : log_move_ratio(up, probs);
    const double r_down = drop_move_ratio ? 0.0 : log_move_ratio(down, probs);
    std::size_t pair = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j, ++pair) {
        const double wm = w[j - i - 1];
        const double k_ij = wm * p / (p + q) * std::exp(mh_log_alpha(lp[i], lp[j], r_up));
        const double k_ji = wm * q / (p + q) * std::exp(mh_log_alpha(lp[j], lp[i], r_down));
        const double d = pi(static_cast<Eigen::Index>(i)) * k_ij - pi(static_cast<Eigen::Index>(j)) * k_ji;
        const double delta = d - mean[pair];
        mean[pair] += delta / static_cast<double>(t + 1);
        m2[pair] += delta * (d - mean[pair]);
      }
    }
  }
  double worst = 0.0, worst_mean = 0.0, worst_se = 0.0, largest_mean = 0.0;
  for (std::size_t pair = 0; pair < n_pairs; ++pair) {
    const double se = std::sqrt(m2[pair] / static_cast<double>(mc_size - 1) / static_cast<double>(mc_size));
    const double excess = std::max(0.0, std::fabs(mean[pair]) - 4.0 * se);
    largest_mean = std::max(largest_mean, std::fabs(mean[pair]));
    if (excess > worst || pair == 0) {
      worst = std::max(worst, excess);
      worst_mean = mean[pair];
      worst_se = se;
    }
  }
  return make_verdict("dependent-z-balance", worst, kDependentZFloor, seed,
                      {{"mc_size", mc_size},
                       {"max_abs_mean_flux_difference", largest_mean},
                       {"worst_mean", worst_mean},
                       {"worst_se", worst_se},
                       {"move_ratio_dropped", drop_move_ratio}});
}

// ---------------------------------------------------------------------------
// Two-step reachability for k = 2 additive TMCMC

using Matrix2i = std::array<std::array<int, 2>, 2>;

/// M_1..M_4 followed by their column-swapped counterparts; x + M (e1, e2)' is
/// reached by the move type in column 1 with eps = e1 and then the move type
/// in column 2 with eps = e2.
inline const std::array<Matrix2i, 8>& rotation_matrices() {
  static const std::array<Matrix2i, 8> m{{
      {{{1, 1}, {1, -1}}},
      {{{-1, 1}, {1, 1}}},
      {{{1, -1}, {-1, -1}}},
      {{{-1, -1}, {-1, 1}}},
      {{{1, 1}, {-1, 1}}},
      {{{1, -1}, {1, 1}}},
      {{{-1, 1}, {-1, -1}}},
      {{{-1, -1}, {1, -1}}},
  }};
  return m;
}

/// Displacement after the two additive moves encoded by the columns of m.
inline std::array<double, 2> two_step_displacement(const Matrix2i& m, double e1, double e2,
                                                   std::span<const double> x) {
  const Vector scales{1.0, 1.0};
  const MoveType z1(std::vector<std::int8_t>{static_cast<std::int8_t>(m[0][0]), static_cast<std::int8_t>(m[1][0])});
  const MoveType z2(std::vector<std::int8_t>{static_cast<std::int8_t>(m[0][1]), static_cast<std::int8_t>(m[1][1])});
  const Vector y1 = additive_forward(x, e1, z1, scales);
  const Vector y2 = additive_forward(y1, e2, z2, scales);
  return {y2[0] - x[0], y2[1] - x[1]};
}

struct ReachabilitySpec {
  std::size_t n_constructive = 1000;
  std::size_t n_iter = 10'000;
  double eps_scale = 1.0;
  std::uint64_t seed = 1;
};

inline Verdict check_two_step_reachability(const ReachabilitySpec& spec) {
  Rng rng(spec.seed);
  double construct_err = 0.0, off_diag_err = 0.0, one_step_off_diag = 0.0;
  for (std::size_t t = 0; t < spec.n_constructive; ++t) {
    const Vector x{4.0 * rng.uniform() - 2.0, 4.0 * rng.uniform() - 2.0};
    const double e1 = 0.05 + 2.0 * rng.uniform(), e2 = 0.05 + 2.0 * rng.uniform();
    for (const auto& m : rotation_matrices()) {
      const auto d = two_step_displacement(m, e1, e2, x);
      const double want0 = m[0][0] * e1 + m[0][1] * e2, want1 = m[1][0] * e1 + m[1][1] * e2;
      construct_err = std::max({construct_err, std::fabs(d[0] - want0), std::fabs(d[1] - want1)});
      // Two steps leave the diagonals through x by exactly 2 min(e1, e2).
      off_diag_err = std::max(off_diag_err, std::fabs(std::fabs(std::fabs(d[0]) - std::fabs(d[1])) - 2.0 * std::min(e1, e2)));
    }
    // Any single move shifts both coordinates by the same magnitude.
    const MoveType z(std::vector<std::int8_t>{static_cast<std::int8_t>(rng.uniform() < 0.5 ? 1 : -1),
                                              static_cast<std::int8_t>(rng.uniform() < 0.5 ? 1 : -1)});
    const Vector y = additive_forward(x, e1, z, Vector{1.0, 1.0});
    one_step_off_diag = std::max(one_step_off_diag, std::fabs(std::fabs(y[0] - x[0]) - std::fabs(y[1] - x[1])));
  }

  const Target target = make_iid_gaussian(2);
  RunOptions options;
  options.time = false;
  const Trace trace = run_chain(make_additive_tmcmc_kernel(target, TmcmcConfig::symmetric(2, spec.eps_scale)), target,
                                Vector{0.0, 0.0}, spec.n_iter, spec.seed, options);
  std::array<std::size_t, 4> quadrant{};  // (+,+), (-,+), (-,-), (+,-)
  for (std::size_t t = 0; t < trace.size(); ++t) {
    const double a = trace.at(t, 0), b = trace.at(t, 1);
    if (a > 0 && b > 0) ++quadrant[0];
    if (a < 0 && b > 0) ++quadrant[1];
    if (a < 0 && b < 0) ++quadrant[2];
    if (a > 0 && b < 0) ++quadrant[3];
  }
  const auto missing = static_cast<double>(std::count(quadrant.begin(), quadrant.end(), std::size_t{0}));
  const double violation = std::max({construct_err, off_diag_err, one_step_off_diag, missing});
  return make_verdict("two-step-reachability", violation, 1e-12, spec.seed,
                      {{"construction_error", construct_err},
                       {"off_diagonal_error", off_diag_err},
                       {"one_step_off_diagonal", one_step_off_diag},
                       {"quadrant_visits", quadrant},
                       {"chain_iterations", spec.n_iter}});
}

// ---------------------------------------------------------------------------
// Leapfrog structure

using Integrator = std::function<PhasePoint(PhasePoint, const HmcConfig&, const Target&)>;

inline PhasePoint leapfrog_integrator(PhasePoint z, const HmcConfig& cfg, const Target& target) {
  return leapfrog(std::move(z), cfg, target);
}

/// Explicit Euler: x += dt M^{-1} p, p -= dt grad U(x_old). Neither
/// reversible nor volume preserving.
inline PhasePoint euler_integrator(PhasePoint z, const HmcConfig& cfg, const Target& target) {
  for (std::size_t step = 0; step < cfg.n_steps; ++step) {
    const Vector g = grad_potential(target, z.x);
    for (std::size_t i = 0; i < z.x.size(); ++i) {
      z.x[i] += cfg.step_size / cfg.mass[i] * z.p[i];
      z.p[i] -= cfg.step_size * g[i];
    }
  }
  return z;
}

struct LeapfrogCheckSpec {
  std::vector<std::size_t> n_steps{1, 5, 20};
  std::vector<double> step_sizes{0.01, 0.1, 0.3};
  std::size_t n_points = 1000;      // reversibility points per (L, dt)
  std::size_t n_jacobian = 20;      // Jacobian points per (L, dt)
  double fd_step = 1e-5;
  std::uint64_t seed = 1;
};

inline constexpr double kReversibilityTolerance = 1e-10;
inline constexpr double kJacobianTolerance = 1e-6;

namespace detail {

inline PhasePoint random_phase_point(Rng& rng, std::size_t k) {
  PhasePoint z{Vector(k), Vector(k)};
  for (std::size_t i = 0; i < k; ++i) {
    z.x[i] = 2.0 * rng.normal();
    z.p[i] = rng.normal();
  }
  return z;
}

inline HmcConfig grid_config(const Target& target, std::size_t l, double dt) {
  return HmcConfig{l, dt, Vector(target.dim(), 1.0)};
}

}  // namespace detail

/// g^L(x'', -p'') must return (x, -p).
inline Verdict check_leapfrog_reversibility(const Target& target, const LeapfrogCheckSpec& spec,
                                            const Integrator& integrate = leapfrog_integrator,
                                            std::string name = "leapfrog-reversibility") {
  if (!target.has_gradient()) throw ConfigError("target", "leapfrog checks need a gradient");
  Rng rng(spec.seed);
  double worst = 0.0;
  for (auto l : spec.n_steps) {
    for (double dt : spec.step_sizes) {
      const HmcConfig cfg = detail::grid_config(target, l, dt);
      for (std::size_t t = 0; t < spec.n_points; ++t) {
        const PhasePoint start = detail::random_phase_point(rng, target.dim());
        PhasePoint end = integrate(start, cfg, target);
        for (double& v : end.p) v = -v;
        const PhasePoint back = integrate(end, cfg, target);
        for (std::size_t i = 0; i < target.dim(); ++i) {
          worst = std::max({worst, std::fabs(back.x[i] - start.x[i]), std::fabs(back.p[i] + start.p[i])});
        }
      }
    }
  }
  return make_verdict(std::move(name), worst, kReversibilityTolerance, spec.seed,
                      {{"grid_size", spec.n_steps.size() * spec.step_sizes.size()}, {"points", spec.n_points}});
}

/// Central-difference Jacobian of (x, p) -> g^L(x, p).
inline Eigen::MatrixXd numeric_phase_jacobian(const Target& target, const PhasePoint& z, const HmcConfig& cfg,
                                              const Integrator& integrate, double h) {
  const std::size_t k = z.x.size();
  const auto n = static_cast<Eigen::Index>(2 * k);
  Eigen::MatrixXd jac(n, n);
  for (std::size_t c = 0; c < 2 * k; ++c) {
    PhasePoint plus = z, minus = z;
    (c < k ? plus.x[c] : plus.p[c - k]) += h;
    (c < k ? minus.x[c] : minus.p[c - k]) -= h;
    const PhasePoint fp = integrate(plus, cfg, target), fm = integrate(minus, cfg, target);
    for (std::size_t r = 0; r < 2 * k; ++r) {
      const double a = r < k ? fp.x[r] : fp.p[r - k];
      const double b = r < k ? fm.x[r] : fm.p[r - k];
      jac(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = (a - b) / (2.0 * h);
    }
  }
  return jac;
}

inline Verdict check_leapfrog_jacobian(const Target& target, const LeapfrogCheckSpec& spec,
                                       const Integrator& integrate = leapfrog_integrator,
                                       std::string name = "leapfrog-volume") {
  if (!target.has_gradient()) throw ConfigError("target", "leapfrog checks need a gradient");
  if (target.dim() > 3) throw ConfigError("dim", "Jacobian determinant check needs k <= 3");
  Rng rng(spec.seed);
  double worst = 0.0;
  for (auto l : spec.n_steps) {
    for (double dt : spec.step_sizes) {
      const HmcConfig cfg = detail::grid_config(target, l, dt);
      for (std::size_t t = 0; t < spec.n_jacobian; ++t) {
        const PhasePoint z = detail::random_phase_point(rng, target.dim());
        const double det = numeric_phase_jacobian(target, z, cfg, integrate, spec.fd_step).determinant();
        worst = std::max(worst, std::fabs(det - 1.0));
      }
    }
  }
  return make_verdict(std::move(name), worst, kJacobianTolerance, spec.seed,
                      {{"fd_step", spec.fd_step}, {"points", spec.n_jacobian}});
}

struct EnergyScalingSpec {
  std::size_t dim = 10;
  std::size_t n_steps = 10;
  double step_size = 0.1;
  std::size_t n_trajectories = 2000;
  std::uint64_t seed = 1;
  double ratio_lo = 3.5;
  double ratio_hi = 4.5;
};

/// Median |Delta H| at (L, dt) over the median at (2L, dt/2) on an iid
/// Gaussian; second-order integration puts the ratio near 4.
inline Verdict check_energy_error_scaling(const EnergyScalingSpec& spec) {
  const Target target = make_iid_gaussian(spec.dim);
  auto median_error = [&](std::size_t l, double dt) {
    Rng rng(spec.seed);
    const HmcConfig cfg = HmcConfig::unit_mass(spec.dim, l, dt);
    std::vector<double> err(spec.n_trajectories);
    for (auto& e : err) {
      PhasePoint z{Vector(spec.dim), Vector(spec.dim)};
      for (std::size_t i = 0; i < spec.dim; ++i) {
        z.x[i] = rng.normal();
        z.p[i] = rng.normal();
      }
      const double h0 = hamiltonian(target, z, cfg.mass);
      e = std::fabs(hamiltonian(target, leapfrog(z, cfg, target), cfg.mass) - h0);
    }
    std::nth_element(err.begin(), err.begin() + static_cast<std::ptrdiff_t>(err.size() / 2), err.end());
    return err[err.size() / 2];
  };
  const double coarse = median_error(spec.n_steps, spec.step_size);
  const double fine = median_error(2 * spec.n_steps, 0.5 * spec.step_size);
  const double ratio = coarse / fine;
  const double violation = std::max({0.0, spec.ratio_lo - ratio, ratio - spec.ratio_hi});
  return make_verdict("energy-error-scaling", violation, 0.0, spec.seed,
                      {{"median_abs_dH_coarse", coarse},
                       {"median_abs_dH_fine", fine},
                       {"ratio", ratio},
                       {"band", {spec.ratio_lo, spec.ratio_hi}}});
}

// ---------------------------------------------------------------------------
// L = 1 HMC proposal law

/// Draws n one-step HMC positions from a fixed x and compares each
/// coordinate's sample mean and variance with `law` by z-scores. The
/// violation is the largest |z|, tolerance 4.
inline Verdict check_one_step_moments(const Target& target, const Vector& x, const HmcConfig& cfg,
                                      const GaussianProposal& law, std::size_t n, std::uint64_t seed,
                                      std::string name = "hmc-one-step-law") {
  if (n < 2) throw ConfigError("draws", "need at least 2 draws");
  if (cfg.n_steps != 1) throw ConfigError("leapfrog_steps", "one-step law needs L = 1");
  const std::size_t k = x.size();
  if (law.mean.size() != k || law.var.size() != k) throw ConfigError("law", "dimension mismatch");
  std::vector<double> mean(k, 0.0), m2(k, 0.0);
  Rng rng(seed);
  for (std::size_t t = 0; t < n; ++t) {
    PhasePoint z{x, Vector(k)};
    for (std::size_t i = 0; i < k; ++i) z.p[i] = std::sqrt(cfg.mass[i]) * rng.normal();
    const PhasePoint end = leapfrog(z, cfg, target);
    for (std::size_t i = 0; i < k; ++i) {
      const double d = end.x[i] - mean[i];
      mean[i] += d / static_cast<double>(t + 1);
      m2[i] += d * (end.x[i] - mean[i]);
    }
  }
  const double nd = static_cast<double>(n);
  double worst = 0.0;
  nlohmann::json coords = nlohmann::json::array();
  for (std::size_t i = 0; i < k; ++i) {
    const double var = m2[i] / (nd - 1.0);
    const double z_mean = (mean[i] - law.mean[i]) / std::sqrt(law.var[i] / nd);
    const double z_var = (var - law.var[i]) / (law.var[i] * std::sqrt(2.0 / (nd - 1.0)));
    worst = std::max({worst, std::fabs(z_mean), std::fabs(z_var)});
    coords.push_back({{"mean", mean[i]}, {"law_mean", law.mean[i]}, {"var", var}, {"law_var", law.var[i]},
                      {"z_mean", z_mean}, {"z_var", z_var}});
  }
  return make_verdict(std::move(name), worst, 4.0, seed, {{"draws", n}, {"coordinates", coords}});
}

/// check_one_step_moments against hmc_one_step_proposal_params.
inline Verdict check_hmc_one_step_law(const Target& target, const Vector& x, const HmcConfig& cfg, std::size_t n,
                                      std::uint64_t seed) {
  return check_one_step_moments(target, x, cfg, hmc_one_step_proposal_params(x, target, cfg), n, seed);
}

}  // namespace tmcmc
