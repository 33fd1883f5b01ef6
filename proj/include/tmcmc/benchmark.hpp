#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "tmcmc/baseline.hpp"
#include "tmcmc/challenger.hpp"
#include "tmcmc/chain.hpp"
#include "tmcmc/diagnostics.hpp"
#include "tmcmc/parallel.hpp"
#include "tmcmc/tmcmc_kernels.hpp"

namespace tmcmc {

/// Gaussian approximation at the posterior mode.
struct LaplaceFit {
  Vector mode;
  Eigen::MatrixXd covariance;
  std::size_t iterations = 0;

  Vector sds() const {
    Vector s(mode.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      s[i] = std::sqrt(covariance(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)));
    }
    return s;
  }
};

/// Damped Newton ascent on log pi with a central-difference Hessian of the
/// analytic gradient. Requires a strictly log-concave neighbourhood of the mode.
inline LaplaceFit laplace_fit(const Target& target, Vector start, double tol = 1e-10, std::size_t max_iter = 200) {
  if (!target.has_gradient()) throw ConfigError("target", "Laplace fit needs a gradient");
  const std::size_t k = target.dim();
  if (start.size() != k) throw ConfigError("x0", "dimension does not match the target");
  auto hessian = [&](const Vector& x) {
    Eigen::MatrixXd h(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    for (std::size_t j = 0; j < k; ++j) {
      const double step = 1e-5 * std::max(1.0, std::fabs(x[j]));
      Vector xp = x, xm = x;
      xp[j] += step;
      xm[j] -= step;
      const Vector gp = target.grad_log_density(xp), gm = target.grad_log_density(xm);
      for (std::size_t i = 0; i < k; ++i) {
        h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (gp[i] - gm[i]) / (2.0 * step);
      }
    }
    return Eigen::MatrixXd(0.5 * (h + h.transpose()));
  };
  LaplaceFit fit;
  Vector x = std::move(start);
  for (fit.iterations = 0; fit.iterations < max_iter; ++fit.iterations) {
    const Vector g = target.grad_log_density(x);
    const Eigen::Map<const Eigen::VectorXd> gv(g.data(), static_cast<Eigen::Index>(k));
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(-hessian(x));
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) throw ConfigError("target", "not log-concave at the iterate");
    const Eigen::VectorXd delta = ldlt.solve(gv);
    double t = 1.0;
    const double lp = target.log_density(x);
    Vector next(k);
    for (int half = 0; half < 60; ++half, t *= 0.5) {
      for (std::size_t i = 0; i < k; ++i) next[i] = x[i] + t * delta(static_cast<Eigen::Index>(i));
      if (target.log_density(next) >= lp) break;
    }
    x = next;
    if (delta.norm() * t < tol) break;
  }
  fit.mode = x;
  fit.covariance = (-hessian(x)).inverse();
  return fit;
}

struct ChallengerSpec {
  double prior_sd = 10.0;
  bool center = false;
  std::size_t n_chains = 4;
  std::size_t n_iter = 200'000;
  double burn_frac = 0.1;
  /// Proposal scales in units of the Laplace posterior SDs.
  double tmcmc_eps_scale = 1.0;
  double rwmh_sigma = 0.25;
  /// Chains start at mode + dispersion * sd * N(0, 1).
  double dispersion = 2.0;
  std::uint64_t seed = 1;
  std::size_t workers = default_workers();
  bool time = true;
  std::vector<ChallengerRecord> data = challenger_data();

  void validate() const {
    if (n_chains < 2) throw ConfigError("chains", "need at least 2 chains for split R-hat");
    if (!(burn_frac >= 0.0 && burn_frac < 1.0)) throw ConfigError("burn_frac", "must lie in [0, 1)");
    const auto burn = static_cast<std::size_t>(burn_frac * static_cast<double>(n_iter));
    if (n_iter - burn < kMinIactLength) throw ConfigError("iters", "need at least 100 post burn-in draws");
    if (!(tmcmc_eps_scale > 0.0)) throw ConfigError("eps_scale", "must be > 0");
    if (!(rwmh_sigma > 0.0)) throw ConfigError("sigma", "must be > 0");
    if (!(dispersion >= 0.0)) throw ConfigError("dispersion", "must be >= 0");
  }
};

struct ParameterSummary {
  double mean = 0.0;
  double sd = 0.0;
  double ess = 0.0;
  double se = 0.0;
  double rhat = 0.0;
};

struct KernelSummary {
  std::string kernel;
  std::array<ParameterSummary, 2> params;
  std::vector<double> accept_rates;
  double wall_ms = 0.0;
};

struct ChallengerReport {
  LaplaceFit laplace;
  KernelSummary tmcmc;
  KernelSummary rwmh;
  std::array<double, 2> agreement_z{};  // |mean diff| / combined SE
  bool disagreement = false;
};

namespace detail {

inline KernelSummary summarize_chains(std::string name, const std::vector<Trace>& traces, std::size_t burn) {
  KernelSummary out;
  out.kernel = std::move(name);
  for (const auto& t : traces) {
    out.accept_rates.push_back(acceptance_rate(t, burn));
    out.wall_ms += t.wall_ms;
  }
  for (std::size_t c = 0; c < 2; ++c) {
    std::vector<std::vector<double>> chains;
    double sum = 0.0, sum2 = 0.0, ess = 0.0;
    std::size_t n = 0;
    for (const auto& t : traces) {
      chains.push_back(t.series(c, burn));
      for (double v : chains.back()) {
        sum += v;
        sum2 += v * v;
      }
      n += chains.back().size();
      ess += iact_and_ess(chains.back()).ess;
    }
    ParameterSummary& p = out.params[c];
    const double nd = static_cast<double>(n);
    p.mean = sum / nd;
    p.sd = std::sqrt(std::max(0.0, (sum2 - nd * p.mean * p.mean) / (nd - 1.0)));
    p.ess = ess;
    p.se = p.sd / std::sqrt(ess);
    p.rhat = split_rhat(chains);
  }
  return out;
}

}  // namespace detail

/// Runs additive TMCMC and RWMH on the Challenger logistic posterior, both
/// with per-coordinate scales from a Laplace fit, and compares the posterior
/// means.
inline ChallengerReport run_challenger(const ChallengerSpec& spec) {
  spec.validate();
  const Target target = make_challenger_logistic(spec.prior_sd, spec.center, spec.data);
  ChallengerReport report;
  report.laplace = laplace_fit(target, Vector{0.0, 0.0});
  const Vector sds = report.laplace.sds();

  TmcmcConfig tcfg{sds, spec.tmcmc_eps_scale, MoveProbabilities::symmetric(2)};
  const Kernel tmcmc = make_additive_tmcmc_kernel(target, tcfg);
  const Kernel rwmh = make_rwmh_kernel(target, RwmhConfig{spec.rwmh_sigma, sds});

  std::vector<Vector> starts(spec.n_chains);
  for (std::size_t c = 0; c < spec.n_chains; ++c) {
    Rng init(derive_seed(spec.seed, 1000 + c));
    starts[c] = report.laplace.mode;
    for (std::size_t i = 0; i < 2; ++i) starts[c][i] += spec.dispersion * sds[i] * init.normal();
  }
  std::vector<Trace> traces(2 * spec.n_chains);
  RunOptions options;
  options.time = spec.time;
  parallel_for(traces.size(), spec.workers, [&](std::size_t i) {
    const std::size_t c = i % spec.n_chains;
    const bool is_tmcmc = i < spec.n_chains;
    // Both kernels share the per-chain seeds.
    traces[i] = run_chain(is_tmcmc ? tmcmc : rwmh, target, starts[c], spec.n_iter, derive_seed(spec.seed, c), options);
  });
  const auto burn = static_cast<std::size_t>(spec.burn_frac * static_cast<double>(spec.n_iter));
  report.tmcmc = detail::summarize_chains(
      "additive-tmcmc", std::vector<Trace>(traces.begin(), traces.begin() + static_cast<std::ptrdiff_t>(spec.n_chains)),
      burn);
  report.rwmh = detail::summarize_chains(
      "rwmh", std::vector<Trace>(traces.begin() + static_cast<std::ptrdiff_t>(spec.n_chains), traces.end()), burn);
  for (std::size_t c = 0; c < 2; ++c) {
    const auto& a = report.tmcmc.params[c];
    const auto& b = report.rwmh.params[c];
    report.agreement_z[c] = std::fabs(a.mean - b.mean) / std::sqrt(a.se * a.se + b.se * b.se);
    if (report.agreement_z[c] > 3.0) report.disagreement = true;
  }
  return report;
}

inline nlohmann::json to_json(const KernelSummary& s) {
  nlohmann::json params = nlohmann::json::object();
  const char* names[2] = {"beta0", "beta1"};
  for (std::size_t c = 0; c < 2; ++c) {
    const auto& p = s.params[c];
    params[names[c]] = {{"mean", p.mean}, {"sd", p.sd}, {"ess", p.ess}, {"se", p.se}, {"rhat", p.rhat}};
  }
  return {{"kernel", s.kernel}, {"params", params}, {"accept_rates", s.accept_rates}, {"wall_ms", s.wall_ms}};
}

inline nlohmann::json to_json(const ChallengerReport& r, const ChallengerSpec& spec) {
  nlohmann::json cov = nlohmann::json::array();
  for (Eigen::Index i = 0; i < r.laplace.covariance.rows(); ++i) {
    cov.push_back({r.laplace.covariance(i, 0), r.laplace.covariance(i, 1)});
  }
  return {{"config",
           {{"prior_sd", spec.prior_sd},
            {"center", spec.center},
            {"chains", spec.n_chains},
            {"iters", spec.n_iter},
            {"burn_frac", spec.burn_frac},
            {"tmcmc_eps_scale", spec.tmcmc_eps_scale},
            {"rwmh_sigma", spec.rwmh_sigma},
            {"seed", spec.seed}}},
          {"laplace", {{"mode", r.laplace.mode}, {"covariance", cov}}},
          {"kernels", {to_json(r.tmcmc), to_json(r.rwmh)}},
          {"agreement", {{"z_beta0", r.agreement_z[0]}, {"z_beta1", r.agreement_z[1]}, {"threshold", 3.0}}},
          {"disagreement", r.disagreement}};
}

}  // namespace tmcmc
