#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <span>

#include "tmcmc/rng.hpp"
#include "tmcmc/target.hpp"

namespace tmcmc {

/// Current position of a chain together with its cached log density.
struct ChainState {
  Vector x;
  double log_density = 0.0;

  static ChainState at(const Target& target, Vector x0) {
    ChainState s{std::move(x0), 0.0};
    s.log_density = target.log_density(s.x);
    return s;
  }
};

/// Outcome of one Metropolis-type update. `accepted == (log_u < log_alpha)`
/// so a step can be replayed from the recorded uniform.
struct StepInfo {
  bool accepted = false;
  double log_alpha = 0.0;
  double log_u = 0.0;
  bool nonfinite_proposal = false;  // proposal log density was NaN/inf, forced to -inf
  bool nonfinite_jacobian = false;
};

using Kernel = std::function<StepInfo(ChainState&, Rng&)>;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Replaces a non-finite log density by -inf (auto-reject). Returns true when
/// the value had to be replaced.
inline bool sanitize_log_density(double& lp) {
  if (std::isfinite(lp)) return false;
  lp = kNegInf;
  return true;
}

/// log of the Metropolis-Hastings acceptance probability
/// min{1, exp(log_move_ratio + lp_y - lp_x + log_jacobian)}.
inline double mh_log_alpha(double lp_x, double lp_y, double log_move_ratio = 0.0,
                           double log_jacobian = 0.0) {
  if (lp_y == kNegInf) return kNegInf;
  const double r = log_move_ratio + (lp_y - lp_x) + log_jacobian;
  if (std::isnan(r)) return kNegInf;
  return r < 0.0 ? r : 0.0;
}

/// Draws U and applies the accept/reject rule; on acceptance swaps the
/// proposal into `state`.
inline StepInfo mh_decide(ChainState& state, Vector& proposal, double lp_proposal,
                          double log_alpha, Rng& rng) {
  StepInfo info;
  info.log_alpha = log_alpha;
  info.log_u = std::log(rng.uniform());
  info.accepted = info.log_u < log_alpha;
  if (info.accepted) {
    state.x.swap(proposal);
    state.log_density = lp_proposal;
  }
  return info;
}

}  // namespace tmcmc
