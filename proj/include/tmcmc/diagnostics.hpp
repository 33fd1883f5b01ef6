#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <mutex>
#include <numeric>
#include <span>
#include <vector>

#include <fftw3.h>

#include "tmcmc/chain.hpp"
#include "tmcmc/error.hpp"
#include "tmcmc/special.hpp"

namespace tmcmc {

// ---------------------------------------------------------------------------
// Chain diagnostics

inline double acceptance_rate(std::span<const std::uint8_t> accepted) {
  if (accepted.empty()) throw ConfigError("trace", "acceptance rate of an empty trace");
  std::size_t n = 0;
  for (auto a : accepted) n += a ? 1 : 0;
  return static_cast<double>(n) / static_cast<double>(accepted.size());
}

inline double acceptance_rate(const Trace& trace, std::size_t burn_in = 0) {
  if (burn_in >= trace.size()) throw ConfigError("burn_in", "leaves an empty trace");
  return acceptance_rate(std::span<const std::uint8_t>(trace.accepted).subspan(burn_in));
}

struct IactEss {
  double iact = 1.0;
  double ess = 0.0;
};

inline constexpr std::size_t kMinIactLength = 100;
/// Lower guard for the IACT of anti-correlated chains.
inline constexpr double kIactFloor = 1e-2;

namespace detail {

/// FFTW planning is not thread-safe; plan execution is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace detail

/// Autocovariances gamma_0 .. gamma_{n-1} (divisor n) of the centred series,
/// computed by zero-padded FFT.
inline std::vector<double> autocovariance(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n == 0) return {};
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
  std::size_t len = 1;
  while (len < 2 * n) len <<= 1;
  const std::size_t n_freq = len / 2 + 1;

  double* buf = fftw_alloc_real(len);
  fftw_complex* spec = fftw_alloc_complex(n_freq);
  fftw_plan forward, backward;
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    forward = fftw_plan_dft_r2c_1d(static_cast<int>(len), buf, spec, FFTW_ESTIMATE);
    backward = fftw_plan_dft_c2r_1d(static_cast<int>(len), spec, buf, FFTW_ESTIMATE);
  }
  for (std::size_t i = 0; i < len; ++i) buf[i] = i < n ? series[i] - mean : 0.0;
  fftw_execute(forward);
  for (std::size_t f = 0; f < n_freq; ++f) {
    spec[f][0] = spec[f][0] * spec[f][0] + spec[f][1] * spec[f][1];
    spec[f][1] = 0.0;
  }
  fftw_execute(backward);
  std::vector<double> gamma(n);
  const double scale = 1.0 / (static_cast<double>(len) * static_cast<double>(n));
  for (std::size_t lag = 0; lag < n; ++lag) gamma[lag] = buf[lag] * scale;
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
  }
  fftw_free(buf);
  fftw_free(spec);
  return gamma;
}

/// Integrated autocorrelation time by Geyer's initial positive sequence:
/// sum the pair sums gamma_{2m} + gamma_{2m+1} while they stay positive.
/// A constant series (every proposal rejected) gets iact = n, i.e. ess = 1.
inline IactEss iact_and_ess(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < kMinIactLength) throw ConfigError("trace", "need at least 100 draws for IACT");
  const double nd = static_cast<double>(n);
  const auto gamma = autocovariance(series);
  const double gamma0 = gamma[0];
  double scale2 = 0.0;
  for (double v : series) scale2 = std::max(scale2, v * v);
  if (!(gamma0 > 1e-24 * std::max(scale2, 1e-300))) return {nd, 1.0};

  double pair_sum_total = 0.0;
  for (std::size_t m = 0; 2 * m + 1 < n; ++m) {
    const double pair = gamma[2 * m] + gamma[2 * m + 1];
    if (!(pair > 0.0)) break;
    pair_sum_total += pair;
  }
  double iact = (2.0 * pair_sum_total - gamma0) / gamma0;
  iact = std::clamp(iact, kIactFloor, nd);
  return {iact, nd / iact};
}

/// Split-chain potential scale reduction for one scalar quantity. Each chain
/// is halved; requires at least 4 draws per chain.
inline double split_rhat(const std::vector<std::vector<double>>& chains) {
  std::vector<std::span<const double>> halves;
  for (const auto& c : chains) {
    if (c.size() < 4) throw ConfigError("trace", "split R-hat needs at least 4 draws per chain");
    const std::size_t h = c.size() / 2;
    halves.emplace_back(c.data(), h);
    halves.emplace_back(c.data() + (c.size() - h), h);
  }
  const std::size_t m = halves.size();
  const std::size_t n = halves.front().size();
  std::vector<double> means(m), vars(m);
  for (std::size_t j = 0; j < m; ++j) {
    const auto& s = halves[j];
    means[j] = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(n);
    double v = 0.0;
    for (double x : s) v += (x - means[j]) * (x - means[j]);
    vars[j] = v / static_cast<double>(n - 1);
  }
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(m);
  double b = 0.0;
  for (double mu : means) b += (mu - grand) * (mu - grand);
  b *= static_cast<double>(n) / static_cast<double>(m - 1);
  const double w = std::accumulate(vars.begin(), vars.end(), 0.0) / static_cast<double>(m);
  if (!(w > 0.0)) return b > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
  const double var_plus = (static_cast<double>(n - 1) / static_cast<double>(n)) * w + b / static_cast<double>(n);
  return std::sqrt(var_plus / w);
}

// ---------------------------------------------------------------------------
// Acceptance-rate bounds for strongly log-concave targets
// (-M_k I <= Hess log pi <= -m_k I). All values are natural logs; the
// prefactor (2 pi)^{k/2} pi(x*) / c^k is not a probability in general, so the
// linear values need not lie in [0, 1].

struct AcceptanceBoundInputs {
  std::size_t k = 1;
  double m_k = 1.0;
  double M_k = 1.0;
  double psi1 = 0.01;
  double psi2 = 0.01;
  double pi_mode = 1.0;  // pi(x*)
  double dt = 0.1;       // HMC step size
  double lambda = 0.0;   // HMC non-centrality

  void validate() const {
    if (k < 1) throw ConfigError("k", "must be at least 1");
    if (!(m_k > 0.0) || !(M_k >= m_k) || !std::isfinite(M_k)) {
      throw ConfigError("m_k", "need 0 < m_k <= M_k");
    }
    if (!(psi1 > 0.0 && psi1 < 1.0) || !(psi2 > 0.0 && psi2 < 1.0) || !(psi1 < 1.0 - psi2)) {
      throw ConfigError("psi", "need psi1, psi2 in (0,1) with psi1 < 1 - psi2");
    }
    if (!(pi_mode > 0.0)) throw ConfigError("pi_mode", "must be > 0");
    if (!(dt > 0.0)) throw ConfigError("dt", "must be > 0");
    if (!(lambda >= 0.0)) throw ConfigError("lambda", "must be >= 0");
  }
};

struct BoundPair {
  double log_lower = 0.0;
  double log_upper = 0.0;
  /// A negative square-root argument was clamped to zero.
  bool clamped = false;

  double lower() const { return std::exp(log_lower); }
  double upper() const { return std::exp(log_upper); }
};

/// log[(2 pi)^{k/2} pi(x*) / c^k].
inline double log_bound_prefactor(std::size_t k, double c, double pi_mode) {
  const double kd = static_cast<double>(k);
  return 0.5 * kd * std::log(2.0 * std::numbers::pi) - kd * std::log(c) + std::log(pi_mode);
}

namespace detail {

/// Standardized argument of the normal-approximation tail shared by the
/// RWMH and HMC bounds:
///   (log_u + sign * k/2 [gap + c h1]) / sqrt(k/2 [gap^2 + 2 c h1 + c^2 h2]),
/// with gap = (M - m)/c, h1 = h2 = 1 for RWMH.
inline double tail_argument(double k, double log_u, double gap, double c, double h1, double h2,
                            double sign_gap) {
  const double num = log_u + 0.5 * k * (sign_gap * gap + c * h1);
  const double den = std::sqrt(0.5 * k * (gap * gap + 2.0 * c * h1 + c * c * h2));
  return num / den;
}

}  // namespace detail

/// Lower and upper bounds on the RWMH acceptance rate:
///   (2pi)^{k/2} pi(x*)/M^k {1 - Phi(A)} <= AR <= (2pi)^{k/2} pi(x*)/m^k {1 - Phi(B)}
/// A = (log(1-psi2) + k/2[(M-m)/M + M]) / sqrt(k/2[((M-m)/M)^2 + 2M + M^2])
/// B = (log psi1 - k/2[(M-m)/m - m]) / sqrt(k/2[((M-m)/m)^2 + 2m + m^2])
inline BoundPair rwmh_ar_bounds(const AcceptanceBoundInputs& in) {
  in.validate();
  const double k = static_cast<double>(in.k);
  const double m = in.m_k, M = in.M_k;
  const double a = detail::tail_argument(k, std::log1p(-in.psi2), (M - m) / M, M, 1.0, 1.0, +1.0);
  const double b = detail::tail_argument(k, std::log(in.psi1), (M - m) / m, m, 1.0, 1.0, -1.0);
  BoundPair out;
  out.log_lower = log_bound_prefactor(in.k, M, in.pi_mode) + special::log_normal_sf(a);
  out.log_upper = log_bound_prefactor(in.k, m, in.pi_mode) + special::log_normal_sf(b);
  return out;
}

/// log[(2pi)^{k/2} / M^k {1 - Phi(sqrt(k/2))}], the large-k form of the RWMH
/// acceptance rate.
inline double rwmh_ar_asymp(std::size_t k, double M_k) {
  if (k < 1) throw ConfigError("k", "must be at least 1");
  if (!(M_k > 0.0)) throw ConfigError("M_k", "must be > 0");
  return log_bound_prefactor(k, M_k, 1.0) + special::log_normal_sf(std::sqrt(0.5 * static_cast<double>(k)));
}

/// Additive-TMCMC bounds at finite k:
///   lower: (2pi)^{k/2} pi(x*)/M^k {2 Phi(sqrt(-2/(kM) log(1-psi2) - (M-m)/M^2)) - 1}
///   upper: (2pi)^{k/2} pi(x*)/m^k {2 Phi(sqrt(-2/(km) log psi1 + (M-m)/m^2)) - 1}
/// A negative radicand (curvature gap dominating at small k) is clamped to 0,
/// making that bound 0, and flagged.
inline BoundPair tmcmc_ar_bounds(const AcceptanceBoundInputs& in) {
  in.validate();
  const double k = static_cast<double>(in.k);
  const double m = in.m_k, M = in.M_k;
  double lower_arg = -2.0 / (k * M) * std::log1p(-in.psi2) - (M - m) / (M * M);
  const double upper_arg = -2.0 / (k * m) * std::log(in.psi1) + (M - m) / (m * m);
  BoundPair out;
  if (lower_arg < 0.0) {
    lower_arg = 0.0;
    out.clamped = true;
  }
  out.log_lower = log_bound_prefactor(in.k, M, in.pi_mode) + special::log_two_phi_minus_one(std::sqrt(lower_arg));
  out.log_upper = log_bound_prefactor(in.k, m, in.pi_mode) + special::log_two_phi_minus_one(std::sqrt(upper_arg));
  return out;
}

/// The same bounds once the curvature-gap terms are dropped (M_k ~ m_k):
///   (2pi)^{k/2} pi(x*)/M^k {2 Phi(sqrt(-2/(kM) log(1-psi2))) - 1} <= AR
///   <= (2pi)^{k/2} pi(x*)/M^k {2 Phi(sqrt(-2/(kM) log psi1)) - 1}
inline BoundPair tmcmc_ar_bounds_simplified(const AcceptanceBoundInputs& in) {
  in.validate();
  const double k = static_cast<double>(in.k);
  const double M = in.M_k;
  const double pref = log_bound_prefactor(in.k, M, in.pi_mode);
  BoundPair out;
  out.log_lower = pref + special::log_two_phi_minus_one(std::sqrt(-2.0 / (k * M) * std::log1p(-in.psi2)));
  out.log_upper = pref + special::log_two_phi_minus_one(std::sqrt(-2.0 / (k * M) * std::log(in.psi1)));
  return out;
}

struct HmcBounds {
  BoundPair bounds;
  /// lambda/k -> 0 regime; identical in form to rwmh_ar_asymp.
  double log_asymp_small_lambda = 0.0;
  /// lambda/k -> inf regime:
  /// (2pi)^{k/2}/M^k {1 - Phi(sqrt(k/2 (1 + lambda/k)) / (sqrt2 sqrt(1/(M dt^2) + 1)))}
  double log_asymp_large_lambda = 0.0;
};

/// Bounds on the L = 1 HMC acceptance rate: the RWMH bounds with M_k, m_k
/// multiplied by dt^2 (1 + lambda/k) in the linear terms and by
/// dt^4 (1 + 2 lambda/k) in the quadratic terms.
inline HmcBounds hmc_ar_bounds(const AcceptanceBoundInputs& in) {
  in.validate();
  const double k = static_cast<double>(in.k);
  const double m = in.m_k, M = in.M_k;
  const double dt2 = in.dt * in.dt;
  const double h1 = dt2 * (1.0 + in.lambda / k);
  const double h2 = dt2 * dt2 * (1.0 + 2.0 * in.lambda / k);
  const double a = detail::tail_argument(k, std::log1p(-in.psi2), (M - m) / M, M, h1, h2, +1.0);
  const double b = detail::tail_argument(k, std::log(in.psi1), (M - m) / m, m, h1, h2, -1.0);
  HmcBounds out;
  out.bounds.log_lower = log_bound_prefactor(in.k, M, in.pi_mode) + special::log_normal_sf(a);
  out.bounds.log_upper = log_bound_prefactor(in.k, m, in.pi_mode) + special::log_normal_sf(b);
  out.log_asymp_small_lambda = rwmh_ar_asymp(in.k, M);
  const double z = std::sqrt(0.5 * k * (1.0 + in.lambda / k)) /
                   (std::numbers::sqrt2 * std::sqrt(1.0 / (M * dt2) + 1.0));
  out.log_asymp_large_lambda = log_bound_prefactor(in.k, M, 1.0) + special::log_normal_sf(z);
  return out;
}

}  // namespace tmcmc
