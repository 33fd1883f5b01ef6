#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>

#include "tmcmc/error.hpp"
#include "tmcmc/rng.hpp"
#include "tmcmc/step.hpp"
#include "tmcmc/target.hpp"

namespace tmcmc {

// ---------------------------------------------------------------------------
// Random-walk Metropolis-Hastings

/// Proposal x' = x + sigma * (a_i N(0,1))_i. `scales` defaults to all ones.
struct RwmhConfig {
  double sigma = 1.0;
  Vector scales;

  void validate(std::size_t k) const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("sigma", "must be finite and > 0");
    if (!scales.empty() && scales.size() != k) throw ConfigError("scales", "need one scale per coordinate");
    for (double a : scales) {
      if (!(a > 0.0)) throw ConfigError("scales", "every a_i must be > 0");
    }
  }
};

inline StepInfo rwmh_step(ChainState& state, const Target& target, const RwmhConfig& cfg, Rng& rng) {
  const std::size_t k = state.x.size();
  Vector y(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double a = cfg.scales.empty() ? 1.0 : cfg.scales[i];
    y[i] = state.x[i] + cfg.sigma * a * rng.normal();
  }
  double lp_y = target.log_density(y);
  const bool bad = sanitize_log_density(lp_y);
  StepInfo info = mh_decide(state, y, lp_y, mh_log_alpha(state.log_density, lp_y), rng);
  info.nonfinite_proposal = bad;
  return info;
}

inline StepInfo rwmh_step(ChainState& state, const Target& target, double sigma, Rng& rng) {
  return rwmh_step(state, target, RwmhConfig{sigma, {}}, rng);
}

inline Kernel make_rwmh_kernel(Target target, RwmhConfig cfg) {
  cfg.validate(target.dim());
  return [target = std::move(target), cfg = std::move(cfg)](ChainState& s, Rng& rng) {
    return rwmh_step(s, target, cfg, rng);
  };
}

// ---------------------------------------------------------------------------
// Hamiltonian Monte Carlo

struct HmcConfig {
  std::size_t n_steps = 1;  // L
  double step_size = 0.1;   // dt
  Vector mass;              // diagonal of M

  static HmcConfig unit_mass(std::size_t k, std::size_t n_steps, double step_size) {
    return {n_steps, step_size, Vector(k, 1.0)};
  }

  void validate(std::size_t k) const {
    if (n_steps < 1) throw ConfigError("leapfrog_steps", "must be at least 1");
    if (!(step_size > 0.0) || !std::isfinite(step_size)) throw ConfigError("step_size", "must be finite and > 0");
    if (mass.size() != k) throw ConfigError("mass", "need one mass per coordinate");
    for (double m : mass) {
      if (!(m > 0.0) || !std::isfinite(m)) throw ConfigError("mass", "every m_i must be > 0");
    }
  }
};

struct PhasePoint {
  Vector x;
  Vector p;
};

/// Raised when the gradient becomes non-finite inside a trajectory.
class LeapfrogError : public std::runtime_error {
 public:
  LeapfrogError(std::size_t step, const std::string& what)
      : std::runtime_error(what + " at leapfrog step " + std::to_string(step)), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// U(x) = -log pi(x).
inline double potential(const Target& target, std::span<const double> x) {
  return -target.log_density(x);
}

inline Vector grad_potential(const Target& target, std::span<const double> x) {
  if (!target.has_gradient()) throw ConfigError("target", target.name() + " has no gradient");
  Vector g = target.grad_log_density(x);
  for (double& v : g) v = -v;
  return g;
}

/// Kinetic energy p' M^{-1} p / 2, matching the N(0, M) momentum law.
inline double kinetic_energy(std::span<const double> p, std::span<const double> mass) {
  double w = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) w += p[i] * p[i] / mass[i];
  return 0.5 * w;
}

/// L leapfrog steps, each in the position-first form
///   x(t+dt) = x(t) + dt M^{-1} { p(t) - dt/2 grad U(x(t)) }
///   p(t+dt) = p(t) - dt/2 { grad U(x(t)) + grad U(x(t+dt)) }
/// (algebraically the kick-drift-kick scheme). One gradient per step.
inline PhasePoint leapfrog(PhasePoint z, const HmcConfig& cfg, const Target& target) {
  const std::size_t k = z.x.size();
  Vector grad = grad_potential(target, z.x);
  const double dt = cfg.step_size;
  for (std::size_t step = 0; step < cfg.n_steps; ++step) {
    for (std::size_t i = 0; i < k; ++i) {
      if (!std::isfinite(grad[i])) throw LeapfrogError(step, "non-finite gradient");
      z.x[i] += dt / cfg.mass[i] * (z.p[i] - 0.5 * dt * grad[i]);
    }
    Vector next = grad_potential(target, z.x);
    for (std::size_t i = 0; i < k; ++i) {
      if (!std::isfinite(next[i])) throw LeapfrogError(step + 1, "non-finite gradient");
      z.p[i] -= 0.5 * dt * (grad[i] + next[i]);
    }
    grad.swap(next);
  }
  return z;
}

inline double hamiltonian(const Target& target, const PhasePoint& z, std::span<const double> mass) {
  return potential(target, z.x) + kinetic_energy(z.p, mass);
}

/// One HMC iteration: fresh momentum p' ~ N(0, M), L leapfrog steps, accept
/// with min{1, exp(H(x, p') - H(x'', p''))}. Momentum is discarded.
inline StepInfo hmc_step(ChainState& state, const Target& target, const HmcConfig& cfg, Rng& rng) {
  const std::size_t k = state.x.size();
  PhasePoint start{state.x, Vector(k)};
  for (std::size_t i = 0; i < k; ++i) start.p[i] = std::sqrt(cfg.mass[i]) * rng.normal();
  const double h0 = -state.log_density + kinetic_energy(start.p, cfg.mass);
  PhasePoint end = leapfrog(start, cfg, target);
  double lp_end = target.log_density(end.x);
  const bool bad = sanitize_log_density(lp_end);
  double log_alpha = kNegInf;
  if (!bad) {
    const double h1 = -lp_end + kinetic_energy(end.p, cfg.mass);
    const double r = h0 - h1;
    log_alpha = std::isnan(r) ? kNegInf : (r < 0.0 ? r : 0.0);
  }
  StepInfo info = mh_decide(state, end.x, lp_end, log_alpha, rng);
  info.nonfinite_proposal = bad;
  return info;
}

inline Kernel make_hmc_kernel(Target target, HmcConfig cfg) {
  cfg.validate(target.dim());
  if (!target.has_gradient()) throw ConfigError("target", target.name() + " has no gradient; HMC needs one");
  return [target = std::move(target), cfg = std::move(cfg)](ChainState& s, Rng& rng) {
    return hmc_step(s, target, cfg, rng);
  };
}

/// Gaussian law of the L = 1 position proposal. From the leapfrog update with
/// p ~ N(0, M):
///   mean_i = x_i + (dt^2 / (2 m_i)) d/dx_i log pi(x),   var_i = dt^2 / m_i.
struct GaussianProposal {
  Vector mean;
  Vector var;
};

inline GaussianProposal hmc_one_step_proposal_params(std::span<const double> x, const Target& target,
                                                     const HmcConfig& cfg) {
  if (cfg.n_steps != 1) throw ConfigError("leapfrog_steps", "one-step proposal law needs L = 1");
  cfg.validate(x.size());
  const Vector score = target.grad_log_density(x);
  const double dt = cfg.step_size;
  GaussianProposal out{Vector(x.size()), Vector(x.size())};
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.mean[i] = x[i] + 0.5 * dt * dt / cfg.mass[i] * score[i];
    out.var[i] = dt * dt / cfg.mass[i];
  }
  return out;
}

}  // namespace tmcmc
