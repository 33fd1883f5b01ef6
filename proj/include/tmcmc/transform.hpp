#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "tmcmc/error.hpp"
#include "tmcmc/rng.hpp"
#include "tmcmc/target.hpp"

namespace tmcmc {

/// Per-coordinate move direction: +1 forward, -1 backward, 0 unchanged.
class MoveType {
 public:
  MoveType() = default;
  explicit MoveType(std::vector<std::int8_t> z) : z_(std::move(z)) {
    for (auto v : z_) {
      if (v < -1 || v > 1) throw ConfigError("move_type", "entries must be -1, 0 or +1");
    }
  }
  explicit MoveType(std::size_t k) : z_(k, 0) {}

  std::size_t size() const { return z_.size(); }
  int operator[](std::size_t i) const { return z_[i]; }
  void set(std::size_t i, int v) { z_[i] = static_cast<std::int8_t>(v); }

  /// The backward move z^c = -z.
  MoveType conjugate() const {
    MoveType c(z_.size());
    for (std::size_t i = 0; i < z_.size(); ++i) c.z_[i] = static_cast<std::int8_t>(-z_[i]);
    return c;
  }

  bool is_zero() const {
    for (auto v : z_) {
      if (v != 0) return false;
    }
    return true;
  }

  const std::vector<std::int8_t>& values() const { return z_; }

  friend bool operator==(const MoveType&, const MoveType&) = default;

 private:
  std::vector<std::int8_t> z_;
};

/// A forward map T_z(x, eps) with its log-Jacobian
/// log |d(T_z(x, eps), eps) / d(x, eps)|. The backward map is T_{z^c}.
struct Transformation {
  using ForwardFn = std::function<void(std::span<const double> x, double eps, const MoveType& z,
                                       std::span<double> out)>;
  using LogJacobianFn =
      std::function<double(std::span<const double> x, double eps, const MoveType& z)>;

  std::string name;
  ForwardFn forward;
  LogJacobianFn log_jacobian;

  Vector apply(std::span<const double> x, double eps, const MoveType& z) const {
    Vector out(x.size());
    forward(x, eps, z, out);
    return out;
  }
};

/// y_i = x_i + z_i a_i eps.
inline void additive_forward(std::span<const double> x, double eps, const MoveType& z,
                             std::span<const double> scales, std::span<double> out) {
  if (x.size() != z.size() || x.size() != scales.size() || x.size() != out.size()) {
    throw ConfigError("dim", "additive transformation dimension mismatch");
  }
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + z[i] * scales[i] * eps;
}

inline Vector additive_forward(std::span<const double> x, double eps, const MoveType& z,
                               std::span<const double> scales) {
  Vector out(x.size());
  additive_forward(x, eps, z, scales, out);
  return out;
}

inline Transformation additive_transformation(Vector scales) {
  Transformation t;
  t.name = "additive";
  t.forward = [scales](std::span<const double> x, double eps, const MoveType& z,
                       std::span<double> out) { additive_forward(x, eps, z, scales, out); };
  t.log_jacobian = [](std::span<const double>, double, const MoveType&) { return 0.0; };
  return t;
}

/// Draw eps ~ |N(0, s^2)|, density g(eps) = 2 phi(eps / s) / s on [0, inf).
inline double sample_epsilon(Rng& rng, double s) {
  if (!(s > 0.0)) throw ConfigError("eps_scale", "must be > 0");
  return rng.half_normal(s);
}

/// Per-coordinate move-type probabilities: +1 with p_i, -1 with q_i,
/// 0 with 1 - p_i - q_i.
struct MoveProbabilities {
  Vector forward;
  Vector backward;

  static MoveProbabilities symmetric(std::size_t k) {
    return {Vector(k, 0.5), Vector(k, 0.5)};
  }

  std::size_t size() const { return forward.size(); }

  double prob(std::size_t i, int z) const {
    if (z > 0) return forward[i];
    if (z < 0) return backward[i];
    return std::max(0.0, 1.0 - forward[i] - backward[i]);
  }

  void validate(std::size_t k) const {
    if (forward.size() != k || backward.size() != k) {
      throw ConfigError("move_probs", "need one (p_i, q_i) pair per coordinate");
    }
    for (std::size_t i = 0; i < k; ++i) {
      const double p = forward[i], q = backward[i];
      if (!(p >= 0.0) || !(q >= 0.0) || p + q > 1.0 + 1e-12) {
        throw ConfigError("move_probs", "need p_i, q_i >= 0 and p_i + q_i <= 1");
      }
    }
  }
};

/// log P(z^c) - log P(z) for coordinatewise move probabilities. The
/// renormalization for the excluded all-zero move is common to both and
/// cancels.
inline double log_move_ratio(const MoveType& z, const MoveProbabilities& probs) {
  double r = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const int zi = z[i];
    if (zi == 0) continue;
    r += std::log(probs.prob(i, -zi)) - std::log(probs.prob(i, zi));
  }
  return r;
}

/// Sample z coordinatewise from `probs`, redrawing the whole vector while it
/// is all-zero. Consumes one uniform per coordinate per attempt.
inline MoveType sample_move_type(Rng& rng, const MoveProbabilities& probs) {
  const std::size_t k = probs.size();
  MoveType z(k);
  for (int attempt = 0; attempt < 1'000'000; ++attempt) {
    for (std::size_t i = 0; i < k; ++i) {
      const double u = rng.uniform();
      const double p = probs.forward[i];
      z.set(i, u < p ? 1 : (u < p + probs.backward[i] ? -1 : 0));
    }
    if (!z.is_zero()) return z;
  }
  throw ConfigError("move_probs", "all-zero move type has probability ~1");
}

struct TmcmcConfig {
  Vector scales;          // a_i > 0
  double eps_scale = 1.0;  // s > 0, eps ~ |N(0, s^2)|
  MoveProbabilities move_probs;

  /// a_i = 1, p_i = q_i = 1/2.
  static TmcmcConfig symmetric(std::size_t k, double eps_scale) {
    return {Vector(k, 1.0), eps_scale, MoveProbabilities::symmetric(k)};
  }

  void validate(std::size_t k) const {
    if (scales.size() != k) throw ConfigError("scales", "need one scale per coordinate");
    for (double a : scales) {
      if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError("scales", "every a_i must be > 0");
    }
    if (!(eps_scale > 0.0) || !std::isfinite(eps_scale)) {
      throw ConfigError("eps_scale", "must be finite and > 0");
    }
    move_probs.validate(k);
  }
};

/// Multivariate normal N(mean, cov) with a precomputed Cholesky factor.
class GaussianSpec {
 public:
  GaussianSpec() = default;
  GaussianSpec(Vector mean, const Eigen::MatrixXd& cov) : mean_(std::move(mean)) {
    const auto k = static_cast<Eigen::Index>(mean_.size());
    if (cov.rows() != k || cov.cols() != k) {
      throw ConfigError("sigma", "covariance must be k x k");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) throw ConfigError("sigma", "covariance must be positive definite");
    chol_ = llt.matrixL();
  }

  static GaussianSpec diagonal(Vector mean, const Vector& variances) {
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(mean.size()),
                                                static_cast<Eigen::Index>(mean.size()));
    if (variances.size() != mean.size()) throw ConfigError("sigma", "need one variance per coordinate");
    for (std::size_t i = 0; i < variances.size(); ++i) {
      if (!(variances[i] > 0.0)) throw ConfigError("sigma", "diagonal entries must be > 0");
      cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = variances[i];
    }
    return GaussianSpec(std::move(mean), cov);
  }

  std::size_t size() const { return mean_.size(); }
  const Vector& mean() const { return mean_; }

  void sample(Rng& rng, std::span<double> out) const {
    const auto k = static_cast<Eigen::Index>(mean_.size());
    Eigen::VectorXd n(k);
    for (Eigen::Index i = 0; i < k; ++i) n(i) = rng.normal();
    const Eigen::VectorXd w = chol_.triangularView<Eigen::Lower>() * n;
    for (Eigen::Index i = 0; i < k; ++i) out[static_cast<std::size_t>(i)] = mean_[static_cast<std::size_t>(i)] + w(i);
  }

 private:
  Vector mean_;
  Eigen::MatrixXd chol_;
};

/// Configuration of the dependent-z kernel: (p_i, q_i, 1 - p_i - q_i) is the
/// softmax of three Gaussian draws w_1, w_2, w_3 redrawn every iteration.
struct DependentZConfig {
  GaussianSpec w1, w2, w3;
  double eps_scale = 1.0;
  Vector scales;

  void validate(std::size_t k) const {
    if (w1.size() != k || w2.size() != k || w3.size() != k) {
      throw ConfigError("mu", "w_1, w_2, w_3 must have dimension k");
    }
    if (scales.size() != k) throw ConfigError("scales", "need one scale per coordinate");
    for (double a : scales) {
      if (!(a > 0.0)) throw ConfigError("scales", "every a_i must be > 0");
    }
    if (!(eps_scale > 0.0)) throw ConfigError("eps_scale", "must be > 0");
  }
};

/// p_i = e^{w1_i} / sum_j e^{wj_i}, q_i = e^{w2_i} / sum_j e^{wj_i}.
inline MoveProbabilities softmax_move_probabilities(std::span<const double> w1,
                                                    std::span<const double> w2,
                                                    std::span<const double> w3) {
  const std::size_t k = w1.size();
  MoveProbabilities probs{Vector(k), Vector(k)};
  for (std::size_t i = 0; i < k; ++i) {
    const double hi = std::max({w1[i], w2[i], w3[i]});
    const double e1 = std::exp(w1[i] - hi), e2 = std::exp(w2[i] - hi), e3 = std::exp(w3[i] - hi);
    const double total = e1 + e2 + e3;
    probs.forward[i] = e1 / total;
    probs.backward[i] = e2 / total;
  }
  return probs;
}

}  // namespace tmcmc
