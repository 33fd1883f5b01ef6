#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "tmcmc/error.hpp"
#include "tmcmc/rng.hpp"
#include "tmcmc/step.hpp"
#include "tmcmc/target.hpp"

namespace tmcmc {

/// Ordered record of a chain run. `states` is row-major, one row of
/// `recorded.size()` columns per iteration (the post-step state).
struct Trace {
  std::size_t dim = 0;
  std::vector<std::size_t> recorded;  // coordinate indices stored in `states`
  std::vector<double> states;
  std::vector<std::uint8_t> accepted;
  std::vector<double> log_density;
  std::size_t nonfinite_proposals = 0;
  std::uint64_t seed = 0;
  double wall_ms = 0.0;

  std::size_t size() const { return accepted.size(); }
  std::size_t width() const { return recorded.size(); }

  double at(std::size_t iter, std::size_t column) const { return states[iter * width() + column]; }

  /// Column `column` of the recorded states from iteration `from` on.
  std::vector<double> series(std::size_t column, std::size_t from = 0) const {
    std::vector<double> out;
    out.reserve(size() - std::min(from, size()));
    for (std::size_t t = from; t < size(); ++t) out.push_back(at(t, column));
    return out;
  }
};

struct RunOptions {
  /// Coordinates to store; empty means all.
  std::vector<std::size_t> record;
  bool time = true;
};

/// Runs `n_iter` iterations of `kernel` from x0 with an engine seeded by
/// `seed`. Deterministic given the seed.
inline Trace run_chain(const Kernel& kernel, const Target& target, Vector x0, std::size_t n_iter,
                       std::uint64_t seed, const RunOptions& options = {}) {
  if (n_iter < 1) throw ConfigError("iters", "must be at least 1");
  if (x0.size() != target.dim()) throw ConfigError("x0", "dimension does not match the target");
  for (double v : x0) {
    if (!std::isfinite(v)) throw ConfigError("x0", "must be finite");
  }
  const auto t0 = std::chrono::steady_clock::now();

  Trace trace;
  trace.dim = target.dim();
  trace.seed = seed;
  if (options.record.empty()) {
    for (std::size_t i = 0; i < target.dim(); ++i) trace.recorded.push_back(i);
  } else {
    for (auto i : options.record) {
      if (i >= target.dim()) throw ConfigError("record", "coordinate index out of range");
    }
    trace.recorded = options.record;
  }
  trace.states.reserve(n_iter * trace.width());
  trace.accepted.reserve(n_iter);
  trace.log_density.reserve(n_iter);

  Rng rng(seed);
  ChainState state = ChainState::at(target, std::move(x0));
  for (std::size_t t = 0; t < n_iter; ++t) {
    const StepInfo info = kernel(state, rng);
    trace.accepted.push_back(info.accepted ? 1 : 0);
    trace.log_density.push_back(state.log_density);
    if (info.nonfinite_proposal) ++trace.nonfinite_proposals;
    for (auto i : trace.recorded) trace.states.push_back(state.x[i]);
  }
  if (options.time) {
    trace.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  }
  return trace;
}

/// CSV with header `iter,accepted,log_density,x_0,...`.
inline void write_trace_csv(std::ostream& out, const Trace& trace) {
  out << "iter,accepted,log_density";
  for (auto i : trace.recorded) out << ",x_" << i;
  out << '\n';
  out.precision(17);
  for (std::size_t t = 0; t < trace.size(); ++t) {
    out << t << ',' << static_cast<int>(trace.accepted[t]) << ',' << trace.log_density[t];
    for (std::size_t c = 0; c < trace.width(); ++c) out << ',' << trace.at(t, c);
    out << '\n';
  }
}

}  // namespace tmcmc
