#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tmcmc/baseline.hpp"
#include "tmcmc/chain.hpp"
#include "tmcmc/diagnostics.hpp"
#include "tmcmc/parallel.hpp"
#include "tmcmc/rng.hpp"
#include "tmcmc/tmcmc_kernels.hpp"

namespace tmcmc {

enum class StudyKernel { additive_tmcmc, rwmh };
enum class StudyTarget { iid_gaussian };

inline std::string to_string(StudyKernel k) {
  return k == StudyKernel::additive_tmcmc ? "additive-tmcmc" : "rwmh";
}

/// Proposal scale = ell / sqrt(k): eps_scale for additive TMCMC, sigma for RWMH.
struct ScalingStudySpec {
  std::vector<std::size_t> dims{10, 30, 100};
  std::vector<double> ell_grid{1.2, 1.5, 1.8, 2.0, 2.2, 2.4, 2.6, 2.8, 3.0, 3.3, 3.7};
  std::vector<StudyKernel> kernels{StudyKernel::additive_tmcmc, StudyKernel::rwmh};
  std::size_t n_iter = 200'000;
  std::size_t burn_in = 10'000;
  StudyTarget target_family = StudyTarget::iid_gaussian;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4};
  /// ESS/iteration is averaged over the first min(k, ess_coords) coordinates.
  std::size_t ess_coords = 10;
  std::size_t workers = default_workers();
  bool time = true;

  void validate() const {
    if (dims.empty()) throw ConfigError("dims", "grid is empty");
    for (auto k : dims) {
      if (k < 1) throw ConfigError("dims", "every k must be >= 1");
    }
    if (ell_grid.empty()) throw ConfigError("ell_grid", "grid is empty");
    for (double l : ell_grid) {
      if (!(l > 0.0)) throw ConfigError("ell_grid", "every ell must be > 0");
    }
    if (!std::is_sorted(ell_grid.begin(), ell_grid.end())) throw ConfigError("ell_grid", "must be increasing");
    if (kernels.empty()) throw ConfigError("kernels", "none selected");
    if (seeds.empty()) throw ConfigError("seeds", "none given");
    if (ess_coords < 1) throw ConfigError("ess_coords", "must be >= 1");
    if (n_iter < 1) throw ConfigError("iters", "must be >= 1");
    if (burn_in >= n_iter) throw ConfigError("burn_in", "must be smaller than iters");
    if (n_iter - burn_in < kMinIactLength) throw ConfigError("iters", "need at least 100 post burn-in draws");
  }
};

struct StudyCell {
  StudyKernel kernel{};
  std::size_t k = 0;
  double ell = 0.0;
  std::uint64_t seed = 0;
  double accept_rate = 0.0;
  double ess_per_iter = 0.0;
  double wall_ms = 0.0;
  bool done = false;
};

/// Efficiency-optimal point for one (kernel, k).
///
/// The mean ESS/iteration over seeds is a noisy and skewed function of ell
/// near its maximum, so ell* is the interior maximum of a least-squares cubic
/// in log(ell) over the whole grid (a quadratic for 3 grid points; the grid
/// argmax when the fit has no interior maximum). The acceptance rate, smooth
/// and monotone in ell, is interpolated at ell*. `grid_ell` is the raw grid
/// argmax for reference.
struct OptimalRow {
  StudyKernel kernel{};
  std::size_t k = 0;
  double ell_star = 0.0;
  double accept_rate = 0.0;
  double accept_se = 0.0;
  double ess_per_iter = 0.0;
  double grid_ell = 0.0;
  double grid_accept_rate = 0.0;
};

struct StudyReport {
  std::vector<StudyCell> cells;  // grid order: kernel, k, ell, seed
  std::vector<OptimalRow> optimal;
  bool partial = false;
  std::string error;
};

inline StudyCell run_study_cell(StudyKernel kernel, std::size_t k, double ell, std::uint64_t seed,
                                const ScalingStudySpec& spec) {
  const Target target = make_iid_gaussian(k);
  const double scale = ell / std::sqrt(static_cast<double>(k));
  const Kernel step = kernel == StudyKernel::additive_tmcmc
                          ? make_additive_tmcmc_kernel(target, TmcmcConfig::symmetric(k, scale))
                          : make_rwmh_kernel(target, RwmhConfig{scale, {}});
  // Start from an exact draw so no transient remains after burn-in.
  Rng init(derive_seed(seed, 0x5eed));
  Vector x0(k);
  for (double& v : x0) v = init.normal();
  RunOptions options;
  for (std::size_t i = 0; i < std::min(k, spec.ess_coords); ++i) options.record.push_back(i);
  options.time = spec.time;
  const Trace trace = run_chain(step, target, std::move(x0), spec.n_iter, seed, options);
  StudyCell cell{kernel, k, ell, seed};
  cell.accept_rate = acceptance_rate(trace, spec.burn_in);
  double ess = 0.0;
  for (std::size_t c = 0; c < trace.width(); ++c) {
    const auto series = trace.series(c, spec.burn_in);
    ess += iact_and_ess(series).ess / static_cast<double>(series.size());
  }
  cell.ess_per_iter = ess / static_cast<double>(trace.width());
  cell.wall_ms = trace.wall_ms;
  cell.done = true;
  return cell;
}

namespace detail {

/// Linear interpolation of ys at x over increasing xs (clamped).
inline double interpolate(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t j = static_cast<std::size_t>(it - xs.begin());
  const double t = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
  return ys[j - 1] + t * (ys[j] - ys[j - 1]);
}

inline OptimalRow select_optimum(StudyKernel kernel, std::size_t k, const std::vector<double>& ells,
                                 const std::vector<std::vector<double>>& ess,    // [ell][seed]
                                 const std::vector<std::vector<double>>& accept  // [ell][seed]
) {
  const std::size_t n = ells.size();
  const std::size_t n_seeds = ess.front().size();
  std::vector<double> log_ell(n), mean_ess(n), mean_ar(n);
  for (std::size_t i = 0; i < n; ++i) {
    log_ell[i] = std::log(ells[i]);
    for (std::size_t s = 0; s < n_seeds; ++s) {
      mean_ess[i] += ess[i][s] / static_cast<double>(n_seeds);
      mean_ar[i] += accept[i][s] / static_cast<double>(n_seeds);
    }
  }
  const std::size_t best = static_cast<std::size_t>(std::max_element(mean_ess.begin(), mean_ess.end()) - mean_ess.begin());

  OptimalRow row{kernel, k};
  row.grid_ell = ells[best];
  row.grid_accept_rate = mean_ar[best];
  row.ell_star = ells[best];
  row.ess_per_iter = mean_ess[best];

  const std::size_t degree = std::min<std::size_t>(3, n - 1);
  if (degree >= 2) {
    const auto rows = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd a(rows, static_cast<Eigen::Index>(degree + 1));
    Eigen::VectorXd b(rows);
    for (std::size_t r = 0; r < n; ++r) {
      const double u = log_ell[r] - log_ell[best];
      double pw = 1.0;
      for (std::size_t d = 0; d <= degree; ++d, pw *= u) a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(d)) = pw;
      b(static_cast<Eigen::Index>(r)) = mean_ess[r];
    }
    const Eigen::VectorXd c = a.colPivHouseholderQr().solve(b);
    const double c3 = degree == 3 ? c(3) : 0.0;
    auto value = [&](double u) { return c(0) + u * (c(1) + u * (c(2) + u * c3)); };
    // Stationary points of the fit: 3 c3 u^2 + 2 c2 u + c1 = 0.
    std::vector<double> candidates;
    const double qa = 3.0 * c3, qb = 2.0 * c(2), qc = c(1);
    const double disc = qb * qb - 4.0 * qa * qc;
    if (qa == 0.0) {
      if (qb != 0.0) candidates.push_back(-qc / qb);
    } else if (disc >= 0.0) {
      // Cancellation-free roots; qa may be tiny when the data are quadratic.
      const double t = -0.5 * (qb + std::copysign(std::sqrt(disc), qb));
      if (t != 0.0) candidates.push_back(qc / t);
      candidates.push_back(t / qa);
    }
    const double u_lo = log_ell.front() - log_ell[best], u_hi = log_ell.back() - log_ell[best];
    bool found = false;
    double u_star = 0.0;
    for (double u : candidates) {
      if (u < u_lo || u > u_hi || !(6.0 * c3 * u + 2.0 * c(2) < 0.0)) continue;
      if (!found || value(u) > value(u_star)) u_star = u;
      found = true;
    }
    if (found) {
      row.ell_star = std::exp(log_ell[best] + u_star);
      row.ess_per_iter = value(u_star);
    }
  }

  const double x = std::log(row.ell_star);
  row.accept_rate = interpolate(log_ell, mean_ar, x);
  if (n_seeds > 1) {
    double ss = 0.0;
    for (std::size_t s = 0; s < n_seeds; ++s) {
      std::vector<double> ar_s(n);
      for (std::size_t i = 0; i < n; ++i) ar_s[i] = accept[i][s];
      const double d = interpolate(log_ell, ar_s, x) - row.accept_rate;
      ss += d * d;
    }
    row.accept_se = std::sqrt(ss / static_cast<double>(n_seeds - 1) / static_cast<double>(n_seeds));
  }
  return row;
}

}  // namespace detail

/// Runs every (kernel, k, ell, seed) cell on a worker pool and selects the
/// efficiency-optimal ell per (kernel, k). Output is independent of the
/// number of workers. A failing cell stops the study and sets `partial`.
inline StudyReport run_scaling_study(const ScalingStudySpec& spec) {
  spec.validate();
  StudyReport report;
  for (auto kern : spec.kernels) {
    for (auto k : spec.dims) {
      for (double ell : spec.ell_grid) {
        for (auto seed : spec.seeds) report.cells.push_back(StudyCell{kern, k, ell, seed});
      }
    }
  }
  try {
    parallel_for(report.cells.size(), spec.workers, [&](std::size_t i) {
      const StudyCell& c = report.cells[i];
      report.cells[i] = run_study_cell(c.kernel, c.k, c.ell, c.seed, spec);
    });
  } catch (const std::exception& e) {
    report.partial = true;
    report.error = e.what();
    return report;
  }

  const std::size_t n_ell = spec.ell_grid.size(), n_seed = spec.seeds.size();
  std::size_t offset = 0;
  for (auto kern : spec.kernels) {
    for (auto k : spec.dims) {
      std::vector<std::vector<double>> ess(n_ell, std::vector<double>(n_seed));
      std::vector<std::vector<double>> ar(n_ell, std::vector<double>(n_seed));
      for (std::size_t i = 0; i < n_ell; ++i) {
        for (std::size_t s = 0; s < n_seed; ++s) {
          const StudyCell& c = report.cells[offset + i * n_seed + s];
          ess[i][s] = c.ess_per_iter;
          ar[i][s] = c.accept_rate;
        }
      }
      report.optimal.push_back(detail::select_optimum(kern, k, spec.ell_grid, ess, ar));
      offset += n_ell * n_seed;
    }
  }
  return report;
}

/// Study grid CSV: `kernel,k,ell,seed,accept_rate,ess_per_iter,wall_ms`.
inline void write_study_csv(std::ostream& out, const StudyReport& report) {
  out << "kernel,k,ell,seed,accept_rate,ess_per_iter,wall_ms\n";
  out.precision(10);
  for (const auto& c : report.cells) {
    if (!c.done) continue;
    out << to_string(c.kernel) << ',' << c.k << ',' << c.ell << ',' << c.seed << ',' << c.accept_rate << ','
        << c.ess_per_iter << ',' << c.wall_ms << '\n';
  }
}

/// Long-format plot data: one row per (kernel, k, ell, metric) averaged over seeds.
inline void write_study_long_csv(std::ostream& out, const StudyReport& report) {
  out << "kernel,k,ell,metric,value\n";
  out.precision(10);
  std::size_t i = 0;
  while (i < report.cells.size()) {
    std::size_t j = i;
    double ar = 0.0, ess = 0.0;
    while (j < report.cells.size() && report.cells[j].kernel == report.cells[i].kernel &&
           report.cells[j].k == report.cells[i].k && report.cells[j].ell == report.cells[i].ell) {
      ar += report.cells[j].accept_rate;
      ess += report.cells[j].ess_per_iter;
      ++j;
    }
    const double n = static_cast<double>(j - i);
    const auto& c = report.cells[i];
    out << to_string(c.kernel) << ',' << c.k << ',' << c.ell << ",accept_rate," << ar / n << '\n';
    out << to_string(c.kernel) << ',' << c.k << ',' << c.ell << ",ess_per_iter," << ess / n << '\n';
    i = j;
  }
}

}  // namespace tmcmc
