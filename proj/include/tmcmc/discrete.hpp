#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "tmcmc/error.hpp"
#include "tmcmc/rng.hpp"
#include "tmcmc/step.hpp"
#include "tmcmc/target.hpp"

namespace tmcmc {

struct SpinState {
  std::vector<int> spins;  // each exactly -1 or +1
};

struct LatticeState {
  std::vector<long> coords;
};

struct DiscreteStepInfo {
  bool accepted = false;
  double log_alpha = 0.0;
};

namespace detail {

template <typename Int>
Vector as_real(const std::vector<Int>& v) {
  return Vector(v.begin(), v.end());
}

inline int sgn(double a) { return a > 0.0 ? 1 : -1; }

}  // namespace detail

// ---------------------------------------------------------------------------
// Ising sgn-transformation kernel
//
// Per coordinate the forward move T(x_i, eps) = sgn(x_i + eps) is picked with
// probability p_i and the backward move sgn(x_i - eps) otherwise, eps > 1.
// Since eps > 1 the forward move always lands on +1 and the backward move on
// -1; the move type that undoes a proposal is therefore the one whose image
// is the old spin.

/// Forward/backward selection probability for a move landing on `spin`.
inline double ising_move_prob(int spin, double p) { return spin > 0 ? p : 1.0 - p; }

/// log P(reverse move type) - log P(move type) for x -> y.
inline double ising_log_move_ratio(std::span<const int> x, std::span<const int> y, std::span<const double> p) {
  double r = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    r += std::log(ising_move_prob(x[i], p[i])) - std::log(ising_move_prob(y[i], p[i]));
  }
  return r;
}

/// Applies the chosen per-coordinate transformation (true = forward).
inline std::vector<int> ising_apply(std::span<const int> x, const std::vector<bool>& forward, double eps) {
  std::vector<int> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = forward[i] ? detail::sgn(x[i] + eps) : detail::sgn(x[i] - eps);
  }
  return y;
}

inline void validate_spins(const SpinState& x, const Target& target) {
  if (target.support() != SupportKind::binary_spins) throw ConfigError("target", "Ising kernel needs a spin target");
  if (x.spins.size() != target.dim()) throw ConfigError("dim", "state dimension does not match the target");
  for (int s : x.spins) {
    if (s != 1 && s != -1) throw ConfigError("state", "spins must be -1 or +1");
  }
}

inline DiscreteStepInfo ising_tmcmc_step(SpinState& x, const Target& target, std::span<const double> p, Rng& rng,
                                         bool drop_move_ratio = false) {
  validate_spins(x, target);
  const std::size_t k = x.spins.size();
  if (p.size() != k) throw ConfigError("p", "need one p_i per coordinate");
  const double eps = 1.0 + rng.half_normal(1.0);
  std::vector<bool> forward(k);
  for (std::size_t i = 0; i < k; ++i) forward[i] = rng.uniform() < p[i];
  std::vector<int> y = ising_apply(x.spins, forward, eps);
  const double lp_x = target.log_density(detail::as_real(x.spins));
  const double lp_y = target.log_density(detail::as_real(y));
  const double ratio = drop_move_ratio ? 0.0 : ising_log_move_ratio(x.spins, y, p);
  DiscreteStepInfo info;
  info.log_alpha = mh_log_alpha(lp_x, lp_y, ratio);
  info.accepted = std::log(rng.uniform()) < info.log_alpha;
  if (info.accepted) x.spins = std::move(y);
  return info;
}

// ---------------------------------------------------------------------------
// Z^k mixture kernel
//
// With probability r one uniformly chosen coordinate moves by +-[eps];
// otherwise every coordinate moves by z_i [eps] with a single eps and
// independent fair signs. eps = 1 + |N(0, s^2)| so [eps] >= 1. Both sub-moves
// are their own reverse with equal probability, hence no move ratio.

struct ZkConfig {
  double r = 0.3;
  double jump_scale = 1.0;

  void validate() const {
    if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("r", "must lie in [0, 1]");
    if (!(jump_scale > 0.0)) throw ConfigError("jump_scale", "must be > 0");
  }
};

/// [eps], the largest integer not exceeding eps.
inline long integer_part(double eps) { return static_cast<long>(std::floor(eps)); }

/// Pr([eps] = m) for eps = 1 + |N(0, s^2)|, m >= 1.
inline double jump_pmf(long m, double s) {
  if (m < 1) return 0.0;
  const double c = s * std::numbers::sqrt2;
  return std::erf(static_cast<double>(m) / c) - std::erf(static_cast<double>(m - 1) / c);
}

/// Pr([eps] > m_max).
inline double jump_tail(long m_max, double s) {
  return std::erfc(static_cast<double>(m_max) / (s * std::numbers::sqrt2));
}

inline DiscreteStepInfo zk_tmcmc_step(LatticeState& x, const Target& target, const ZkConfig& cfg, Rng& rng) {
  const std::size_t k = x.coords.size();
  std::vector<long> y = x.coords;
  if (rng.uniform() < cfg.r) {
    const std::size_t j = rng.index(k);
    const long sign = rng.uniform() < 0.5 ? 1 : -1;
    const long m = integer_part(1.0 + rng.half_normal(cfg.jump_scale));
    y[j] += sign * m;
  } else {
    const long m = integer_part(1.0 + rng.half_normal(cfg.jump_scale));
    for (std::size_t i = 0; i < k; ++i) y[i] += (rng.uniform() < 0.5 ? 1 : -1) * m;
  }
  const double lp_x = target.log_density(detail::as_real(x.coords));
  const double lp_y = target.log_density(detail::as_real(y));
  DiscreteStepInfo info;
  info.log_alpha = mh_log_alpha(lp_x, lp_y);
  info.accepted = std::log(rng.uniform()) < info.log_alpha;
  if (info.accepted) x.coords = std::move(y);
  return info;
}

// ---------------------------------------------------------------------------
// Exact transition matrices for finite state spaces

/// One proposal outcome from a given state: destination (nullopt = leaves the
/// enumerated space, counted as a rejection), probability of proposing it and
/// log acceptance probability.
struct ProposalBranch {
  std::optional<std::size_t> to;
  double prob = 0.0;
  double log_alpha = 0.0;
};

/// A finite-state kernel: `branches(i, out)` appends every proposal outcome
/// from state i; the proposal probabilities of one state must sum to 1.
struct FiniteKernel {
  std::size_t n_states = 0;
  std::function<void(std::size_t, std::vector<ProposalBranch>&)> branches;
};

inline constexpr double kRowSumTolerance = 1e-12;

/// K_ij = sum of prob * alpha over branches i -> j (j != i); the diagonal
/// collects rejections, self-proposals and out-of-space proposals.
inline Eigen::MatrixXd exact_transition_matrix(const FiniteKernel& kernel) {
  if (kernel.n_states == 0 || kernel.n_states > 5000) {
    throw ConfigError("states", "need between 1 and 5000 enumerated states");
  }
  const auto n = static_cast<Eigen::Index>(kernel.n_states);
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  std::vector<ProposalBranch> out;
  for (Eigen::Index i = 0; i < n; ++i) {
    out.clear();
    kernel.branches(static_cast<std::size_t>(i), out);
    double total = 0.0;
    for (const auto& b : out) {
      total += b.prob;
      if (!b.to) {
        k(i, i) += b.prob;
        continue;
      }
      const auto j = static_cast<Eigen::Index>(*b.to);
      const double alpha = std::exp(b.log_alpha);
      k(i, j) += b.prob * alpha;
      k(i, i) += b.prob * (1.0 - alpha);
    }
    if (std::fabs(total - 1.0) > kRowSumTolerance || std::fabs(k.row(i).sum() - 1.0) > kRowSumTolerance) {
      throw InternalError("transition matrix row " + std::to_string(i) + " does not sum to 1");
    }
  }
  return k;
}

/// All of {-1,+1}^k in binary order (bit i set -> spin i = +1).
inline std::vector<std::vector<int>> enumerate_spins(std::size_t k) {
  if (k == 0 || k > 12) throw ConfigError("dim", "spin enumeration supports 1 <= k <= 12");
  std::vector<std::vector<int>> states(std::size_t{1} << k, std::vector<int>(k));
  for (std::size_t s = 0; s < states.size(); ++s) {
    for (std::size_t i = 0; i < k; ++i) states[s][i] = (s >> i) & 1U ? 1 : -1;
  }
  return states;
}

inline std::size_t spin_index(std::span<const int> x) {
  std::size_t s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0) s |= std::size_t{1} << i;
  }
  return s;
}

/// Ising kernel as a finite kernel, integrating over an eps grid on (1, inf)
/// with the given weights (summing to 1).
inline FiniteKernel ising_finite_kernel(const Target& target, Vector p, Vector eps_grid, Vector eps_weights,
                                        bool drop_move_ratio = false) {
  const std::size_t k = target.dim();
  if (p.size() != k) throw ConfigError("p", "need one p_i per coordinate");
  for (double v : p) {
    if (!(v > 0.0 && v < 1.0)) throw ConfigError("p", "every p_i must lie in (0, 1)");
  }
  if (eps_grid.size() != eps_weights.size() || eps_grid.empty()) throw ConfigError("eps_grid", "grid/weights mismatch");
  for (double e : eps_grid) {
    if (!(e > 1.0)) throw ConfigError("eps_grid", "eps must exceed 1");
  }
  auto states = enumerate_spins(k);
  FiniteKernel fk;
  fk.n_states = states.size();
  fk.branches = [=](std::size_t i, std::vector<ProposalBranch>& out) {
    const auto& x = states[i];
    const double lp_x = target.log_density(detail::as_real(x));
    for (std::size_t e = 0; e < eps_grid.size(); ++e) {
      for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
        std::vector<bool> forward(k);
        double prob = eps_weights[e];
        for (std::size_t c = 0; c < k; ++c) {
          forward[c] = (mask >> c) & 1U;
          prob *= forward[c] ? p[c] : 1.0 - p[c];
        }
        const auto y = ising_apply(x, forward, eps_grid[e]);
        const double lp_y = target.log_density(detail::as_real(y));
        const double ratio = drop_move_ratio ? 0.0 : ising_log_move_ratio(x, y, p);
        out.push_back({spin_index(y), prob, mh_log_alpha(lp_x, lp_y, ratio)});
      }
    }
  };
  return fk;
}

/// Box [-R, R]^k of Z^k in mixed-radix order (coordinate 0 fastest).
class LatticeBox {
 public:
  LatticeBox(std::size_t k, long radius) : k_(k), radius_(radius) {
    if (k == 0) throw ConfigError("dim", "must be at least 1");
    if (radius < 1) throw ConfigError("box_radius", "must be at least 1");
    const std::size_t side = static_cast<std::size_t>(2 * radius + 1);
    size_ = 1;
    for (std::size_t i = 0; i < k; ++i) {
      size_ *= side;
      if (size_ > 5000) throw ConfigError("box_radius", "box exceeds 5000 states");
    }
  }

  std::size_t dim() const { return k_; }
  long radius() const { return radius_; }
  std::size_t size() const { return size_; }

  std::vector<long> state(std::size_t index) const {
    const std::size_t side = static_cast<std::size_t>(2 * radius_ + 1);
    std::vector<long> x(k_);
    for (std::size_t i = 0; i < k_; ++i) {
      x[i] = static_cast<long>(index % side) - radius_;
      index /= side;
    }
    return x;
  }

  std::optional<std::size_t> index(std::span<const long> x) const {
    const std::size_t side = static_cast<std::size_t>(2 * radius_ + 1);
    std::size_t idx = 0, stride = 1;
    for (std::size_t i = 0; i < k_; ++i) {
      if (x[i] < -radius_ || x[i] > radius_) return std::nullopt;
      idx += static_cast<std::size_t>(x[i] + radius_) * stride;
      stride *= side;
    }
    return idx;
  }

 private:
  std::size_t k_;
  long radius_;
  std::size_t size_ = 0;
};

/// The Z^k mixture kernel restricted to a box; proposals leaving the box are
/// rejected. Jumps beyond the box diameter always leave it, so their total
/// mass Pr([eps] > 2R) is booked as a single out-of-space branch.
inline FiniteKernel zk_finite_kernel(const Target& target, const LatticeBox& box, const ZkConfig& cfg) {
  cfg.validate();
  const std::size_t k = box.dim();
  if (target.dim() != k) throw ConfigError("dim", "box and target dimensions differ");
  const long m_max = 2 * box.radius();
  FiniteKernel fk;
  fk.n_states = box.size();
  fk.branches = [=](std::size_t i, std::vector<ProposalBranch>& out) {
    const auto x = box.state(i);
    const double lp_x = target.log_density(detail::as_real(x));
    auto push = [&](const std::vector<long>& y, double prob) {
      const auto j = box.index(y);
      if (!j) {
        out.push_back({std::nullopt, prob, kNegInf});
        return;
      }
      out.push_back({*j, prob, mh_log_alpha(lp_x, target.log_density(detail::as_real(y)))});
    };
    const double tail = jump_tail(m_max, cfg.jump_scale);
    for (long m = 1; m <= m_max; ++m) {
      const double pm = jump_pmf(m, cfg.jump_scale);
      if (cfg.r > 0.0) {
        for (std::size_t j = 0; j < k; ++j) {
          for (long sign : {1L, -1L}) {
            auto y = x;
            y[j] += sign * m;
            push(y, cfg.r / static_cast<double>(k) * 0.5 * pm);
          }
        }
      }
      if (cfg.r < 1.0) {
        const double sign_prob = std::ldexp(1.0, -static_cast<int>(k));
        for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
          auto y = x;
          for (std::size_t c = 0; c < k; ++c) y[c] += ((mask >> c) & 1U ? 1 : -1) * m;
          push(y, (1.0 - cfg.r) * sign_prob * pm);
        }
      }
    }
    out.push_back({std::nullopt, tail, kNegInf});
  };
  return fk;
}

/// Target masses normalized over an enumerated state list.
inline Eigen::VectorXd normalized_masses(const Target& target, std::size_t n_states,
                                         const std::function<Vector(std::size_t)>& state_of) {
  Eigen::VectorXd lp(static_cast<Eigen::Index>(n_states));
  for (std::size_t i = 0; i < n_states; ++i) lp(static_cast<Eigen::Index>(i)) = target.log_density(state_of(i));
  const double hi = lp.maxCoeff();
  Eigen::VectorXd w = (lp.array() - hi).exp();
  return w / w.sum();
}

inline Eigen::VectorXd ising_masses(const Target& target) {
  const auto states = enumerate_spins(target.dim());
  return normalized_masses(target, states.size(), [&](std::size_t i) { return detail::as_real(states[i]); });
}

inline Eigen::VectorXd lattice_masses(const Target& target, const LatticeBox& box) {
  return normalized_masses(target, box.size(), [&](std::size_t i) { return detail::as_real(box.state(i)); });
}

/// Dense CSV dump of a matrix, one row per line.
inline void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m) {
  out.precision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << m(i, j);
    }
    out << '\n';
  }
}

}  // namespace tmcmc
