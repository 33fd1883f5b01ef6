#pragma once

#include <cmath>
#include <span>

#include "tmcmc/rng.hpp"
#include "tmcmc/step.hpp"
#include "tmcmc/target.hpp"
#include "tmcmc/transform.hpp"

// Transformation-based MCMC kernels. Every kernel draws a single eps per
// iteration and moves all selected coordinates with it.
//
// RNG consumption order (shared by all kernels so that specializations
// reproduce each other): [w draws], eps, one uniform per coordinate for z,
// then the acceptance uniform.

namespace tmcmc {

/// Additive TMCMC: y_i = x_i + z_i a_i eps, z_i = +1 w.p. p_i, -1 w.p. q_i.
/// Requires p_i + q_i = 1.
inline StepInfo additive_tmcmc_step(ChainState& state, const Target& target,
                                    const TmcmcConfig& cfg, Rng& rng) {
  const std::size_t k = state.x.size();
  const double eps = sample_epsilon(rng, cfg.eps_scale);
  MoveType z(k);
  for (std::size_t i = 0; i < k; ++i) {
    z.set(i, rng.uniform() < cfg.move_probs.forward[i] ? 1 : -1);
  }
  Vector y(k);
  additive_forward(state.x, eps, z, cfg.scales, y);
  double lp_y = target.log_density(y);
  const bool bad = sanitize_log_density(lp_y);
  const double log_alpha =
      mh_log_alpha(state.log_density, lp_y, log_move_ratio(z, cfg.move_probs));
  StepInfo info = mh_decide(state, y, lp_y, log_alpha, rng);
  info.nonfinite_proposal = bad;
  return info;
}

/// General single-eps TMCMC with an arbitrary transformation and move types
/// in {-1, 0, +1}^k (all-zero excluded by resampling).
inline StepInfo general_tmcmc_step(ChainState& state, const Target& target,
                                   const Transformation& transform, const TmcmcConfig& cfg,
                                   Rng& rng) {
  const double eps = sample_epsilon(rng, cfg.eps_scale);
  const MoveType z = sample_move_type(rng, cfg.move_probs);
  Vector y(state.x.size());
  transform.forward(state.x, eps, z, y);
  double lp_y = target.log_density(y);
  const bool bad = sanitize_log_density(lp_y);
  const double log_jac = transform.log_jacobian(state.x, eps, z);
  double log_alpha;
  bool bad_jac = false;
  if (!std::isfinite(log_jac)) {
    log_alpha = kNegInf;
    bad_jac = true;
  } else {
    log_alpha = mh_log_alpha(state.log_density, lp_y, log_move_ratio(z, cfg.move_probs), log_jac);
  }
  StepInfo info = mh_decide(state, y, lp_y, log_alpha, rng);
  info.nonfinite_proposal = bad;
  info.nonfinite_jacobian = bad_jac;
  return info;
}

/// Dependent-z TMCMC: (p, q) are redrawn each iteration as the softmax of
/// Gaussian draws w_1, w_2, w_3; z_i = +1 w.p. p_i, -1 w.p. q_i, 0 otherwise.
inline StepInfo dependent_z_tmcmc_step(ChainState& state, const Target& target,
                                       const DependentZConfig& cfg, Rng& rng) {
  const std::size_t k = state.x.size();
  Vector w1(k), w2(k), w3(k);
  cfg.w1.sample(rng, w1);
  cfg.w2.sample(rng, w2);
  cfg.w3.sample(rng, w3);
  const MoveProbabilities probs = softmax_move_probabilities(w1, w2, w3);
  const double eps = sample_epsilon(rng, cfg.eps_scale);
  const MoveType z = sample_move_type(rng, probs);
  Vector y(k);
  additive_forward(state.x, eps, z, cfg.scales, y);
  double lp_y = target.log_density(y);
  const bool bad = sanitize_log_density(lp_y);
  const double log_alpha = mh_log_alpha(state.log_density, lp_y, log_move_ratio(z, probs));
  StepInfo info = mh_decide(state, y, lp_y, log_alpha, rng);
  info.nonfinite_proposal = bad;
  return info;
}

inline Kernel make_additive_tmcmc_kernel(Target target, TmcmcConfig cfg) {
  cfg.validate(target.dim());
  for (std::size_t i = 0; i < target.dim(); ++i) {
    if (std::fabs(cfg.move_probs.forward[i] + cfg.move_probs.backward[i] - 1.0) > 1e-12) {
      throw ConfigError("move_probs", "additive kernel needs p_i + q_i = 1");
    }
  }
  return [target = std::move(target), cfg = std::move(cfg)](ChainState& s, Rng& rng) {
    return additive_tmcmc_step(s, target, cfg, rng);
  };
}

inline Kernel make_general_tmcmc_kernel(Target target, Transformation transform,
                                        TmcmcConfig cfg) {
  cfg.validate(target.dim());
  return [target = std::move(target), transform = std::move(transform),
          cfg = std::move(cfg)](ChainState& s, Rng& rng) {
    return general_tmcmc_step(s, target, transform, cfg, rng);
  };
}

inline Kernel make_dependent_z_kernel(Target target, DependentZConfig cfg) {
  cfg.validate(target.dim());
  return [target = std::move(target), cfg = std::move(cfg)](ChainState& s, Rng& rng) {
    return dependent_z_tmcmc_step(s, target, cfg, rng);
  };
}

}  // namespace tmcmc
