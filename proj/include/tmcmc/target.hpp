#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tmcmc/error.hpp"

namespace tmcmc {

using Vector = std::vector<double>;

enum class SupportKind { continuous, binary_spins, integer_lattice };

/// Curvature sandwich -M_k I <= Hess log pi <= -m_k I and the mode x*.
struct LogConcaveMeta {
  double m_k = 1.0;
  double M_k = 1.0;
  Vector mode;
};

/// A target distribution known through its (possibly unnormalized) log
/// density. Discrete targets take integer-valued states encoded as doubles.
///
/// Targets are immutable once built, so one instance can be shared by any
/// number of concurrently running chains.
class Target {
 public:
  using LogDensityFn = std::function<double(std::span<const double>)>;
  using GradientFn = std::function<void(std::span<const double>, std::span<double>)>;

  Target(std::string name, std::size_t dim, SupportKind support, LogDensityFn log_density,
         GradientFn gradient = {}, std::optional<LogConcaveMeta> meta = std::nullopt)
      : name_(std::move(name)),
        dim_(dim),
        support_(support),
        log_density_(std::move(log_density)),
        gradient_(std::move(gradient)),
        meta_(std::move(meta)) {
    if (dim_ == 0) throw ConfigError("dim", "must be at least 1");
    if (!log_density_) throw ConfigError("log_density", "callback is empty");
  }

  const std::string& name() const { return name_; }
  std::size_t dim() const { return dim_; }
  SupportKind support() const { return support_; }
  bool has_gradient() const { return static_cast<bool>(gradient_); }
  const std::optional<LogConcaveMeta>& log_concave_meta() const { return meta_; }

  double log_density(std::span<const double> x) const { return log_density_(x); }

  void grad_log_density(std::span<const double> x, std::span<double> out) const {
    if (!gradient_) throw ConfigError("target", name_ + " has no gradient");
    gradient_(x, out);
  }

  Vector grad_log_density(std::span<const double> x) const {
    Vector g(dim_);
    grad_log_density(x, g);
    return g;
  }

 private:
  std::string name_;
  std::size_t dim_;
  SupportKind support_;
  LogDensityFn log_density_;
  GradientFn gradient_;
  std::optional<LogConcaveMeta> meta_;
};

/// Normalized N(0, I_k).
inline Target make_iid_gaussian(std::size_t k) {
  if (k == 0) throw ConfigError("dim", "must be at least 1");
  const double log_norm = -0.5 * static_cast<double>(k) * std::log(2.0 * std::numbers::pi);
  auto log_density = [log_norm](std::span<const double> x) {
    double ss = 0.0;
    for (double v : x) ss += v * v;
    return log_norm - 0.5 * ss;
  };
  auto gradient = [](std::span<const double> x, std::span<double> g) {
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = -x[i];
  };
  return Target("iid-gaussian", k, SupportKind::continuous, log_density, gradient,
                LogConcaveMeta{1.0, 1.0, Vector(k, 0.0)});
}

/// Independent Gaussian with per-coordinate precisions lambda_i:
/// log pi(x) = const - 1/2 sum lambda_i x_i^2, normalized.
inline Target make_anisotropic_gaussian(Vector precisions) {
  if (precisions.empty()) throw ConfigError("dim", "must be at least 1");
  double log_norm = 0.0;
  for (double lam : precisions) {
    if (!(lam > 0.0) || !std::isfinite(lam)) {
      throw ConfigError("precisions", "every precision must be finite and > 0");
    }
    log_norm += 0.5 * std::log(lam / (2.0 * std::numbers::pi));
  }
  const auto [lo, hi] = std::minmax_element(precisions.begin(), precisions.end());
  LogConcaveMeta meta{*lo, *hi, Vector(precisions.size(), 0.0)};
  auto log_density = [precisions, log_norm](std::span<const double> x) {
    double q = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) q += precisions[i] * x[i] * x[i];
    return log_norm - 0.5 * q;
  };
  auto gradient = [precisions](std::span<const double> x, std::span<double> g) {
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = -precisions[i] * x[i];
  };
  const std::size_t k = precisions.size();
  return Target("anisotropic-gaussian", k, SupportKind::continuous, log_density, gradient,
                std::move(meta));
}

/// Nearest-neighbour Ising chain on {-1,+1}^k:
/// log pi(x) = coupling * sum_{i<k} x_i x_{i+1} (unnormalized).
inline Target make_ising_chain(std::size_t k, double coupling) {
  if (k == 0) throw ConfigError("dim", "must be at least 1");
  if (!std::isfinite(coupling)) throw ConfigError("coupling", "must be finite");
  auto log_density = [coupling](std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) s += x[i] * x[i + 1];
    return coupling * s;
  };
  return Target("ising-chain", k, SupportKind::binary_spins, log_density);
}

/// Product of discrete Laplace weights on Z^k: log pi(x) = -rate * sum |x_i|.
inline Target make_lattice_target(std::size_t k, double rate) {
  if (k == 0) throw ConfigError("dim", "must be at least 1");
  if (!(rate > 0.0) || !std::isfinite(rate)) throw ConfigError("rate", "must be finite and > 0");
  auto log_density = [rate](std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += std::fabs(v);
    return -rate * s;
  };
  return Target("lattice-laplace", k, SupportKind::integer_lattice, log_density);
}

}  // namespace tmcmc
