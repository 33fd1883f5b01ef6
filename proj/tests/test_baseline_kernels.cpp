#include <gtest/gtest.h>

#include <cmath>

#include "tmcmc/baseline.hpp"
#include "tmcmc/chain.hpp"
#include "tmcmc/challenger.hpp"
#include "tmcmc/diagnostics.hpp"
#include "tmcmc/verify.hpp"

using namespace tmcmc;

namespace {

/// Flat log density with zero gradient: a free particle.
Target flat_target(std::size_t k) {
  return Target(
      "flat", k, SupportKind::continuous, [](std::span<const double>) { return 0.0; },
      [](std::span<const double>, std::span<double> g) {
        for (double& v : g) v = 0.0;
      });
}

void expect_moments(const Trace& tr, std::size_t burn, double mean_tol, double var_tol) {
  for (std::size_t c = 0; c < tr.width(); ++c) {
    const auto s = tr.series(c, burn);
    double m = 0.0, m2 = 0.0;
    for (double v : s) {
      m += v;
      m2 += v * v;
    }
    m /= static_cast<double>(s.size());
    m2 /= static_cast<double>(s.size());
    EXPECT_NEAR(m, 0.0, mean_tol) << "coordinate " << c;
    EXPECT_NEAR(m2 - m * m, 1.0, var_tol) << "coordinate " << c;
  }
}

}  // namespace

TEST(Rwmh, DensityRatioAcceptance) {
  const Target t = make_iid_gaussian(1);
  EXPECT_NEAR(mh_log_alpha(t.log_density(Vector{0.0}), t.log_density(Vector{1.0})), -0.5, 1e-15);
  Rng rng(3), replay(3);
  ChainState s = ChainState::at(t, Vector{0.4});
  for (int i = 0; i < 500; ++i) {
    const Vector x = s.x;
    const StepInfo info = rwmh_step(s, t, 0.7, rng);
    const Vector y{x[0] + 0.7 * replay.normal()};
    const double log_u = std::log(replay.uniform());
    EXPECT_NEAR(info.log_alpha, std::min(0.0, t.log_density(y) - t.log_density(x)), 1e-12);
    EXPECT_EQ(info.accepted, log_u < info.log_alpha);
    EXPECT_EQ(s.x, info.accepted ? y : x);
  }
}

TEST(Rwmh, TinySigmaAtModeAlwaysAccepts) {
  const Target t = make_iid_gaussian(3);
  const Trace tr = run_chain(make_rwmh_kernel(t, RwmhConfig{1e-9, {}}), t, Vector(3, 0.0), 2000, 1);
  EXPECT_GT(acceptance_rate(tr), 0.999);
}

TEST(Rwmh, ValidatesConfig) {
  const Target t = make_iid_gaussian(2);
  EXPECT_THROW(make_rwmh_kernel(t, RwmhConfig{0.0, {}}), ConfigError);
  EXPECT_THROW(make_rwmh_kernel(t, RwmhConfig{1.0, {1.0}}), ConfigError);
  EXPECT_THROW(make_rwmh_kernel(t, RwmhConfig{1.0, {1.0, -1.0}}), ConfigError);
}

TEST(Rwmh, TunedAcceptanceNearQuarterAtHighDimension) {
  const std::size_t k = 100;
  const Target t = make_iid_gaussian(k);
  const Trace tr = run_chain(make_rwmh_kernel(t, RwmhConfig{2.38 / std::sqrt(100.0), {}}), t, Vector(k, 0.0),
                             50'000, 7, {{0}, false});
  EXPECT_NEAR(acceptance_rate(tr, 5000), 0.234, 0.03);
}

TEST(Rwmh, DeterministicGivenSeed) {
  const Target t = make_iid_gaussian(4);
  const Kernel k = make_rwmh_kernel(t, RwmhConfig{0.8, {}});
  EXPECT_EQ(run_chain(k, t, Vector(4, 0.0), 500, 5).states, run_chain(k, t, Vector(4, 0.0), 500, 5).states);
}

TEST(Potential, GaussianAndFiniteDifferences) {
  const Target t = make_iid_gaussian(3);
  const Vector x{0.5, -1.0, 2.0};
  EXPECT_NEAR(potential(t, x) - potential(t, Vector(3, 0.0)), 0.5 * (0.25 + 1.0 + 4.0), 1e-14);
  EXPECT_EQ(grad_potential(t, x), x);
  const Target c = make_challenger_logistic(10.0);
  const Vector b{3.0, -0.05};
  const Vector g = grad_potential(c, b);
  for (std::size_t i = 0; i < 2; ++i) {
    Vector up = b, down = b;
    up[i] += 1e-5;
    down[i] -= 1e-5;
    const double fd = (potential(c, up) - potential(c, down)) / 2e-5;
    EXPECT_LT(std::fabs(g[i] - fd) / (1.0 + std::fabs(g[i])), 1e-5);
  }
  const Vector g0 = grad_potential(c, Vector{0.0, 0.0});
  EXPECT_TRUE(std::isfinite(g0[0]) && std::isfinite(g0[1]));
}

TEST(Potential, MissingGradientIsAConfigError) {
  const Target no_grad("no-grad", 1, SupportKind::continuous, [](std::span<const double> x) { return -x[0] * x[0]; });
  EXPECT_THROW(make_hmc_kernel(no_grad, HmcConfig::unit_mass(1, 1, 0.1)), ConfigError);
}

TEST(Leapfrog, HandEvaluatedStep) {
  // x = 1, p = 0, M = 1, dt = 0.1, L = 1 on N(0, 1).
  const PhasePoint out = leapfrog({{1.0}, {0.0}}, HmcConfig::unit_mass(1, 1, 0.1), make_iid_gaussian(1));
  EXPECT_NEAR(out.x[0], 0.995, 1e-15);
  EXPECT_NEAR(out.p[0], -0.09975, 1e-15);
}

TEST(Leapfrog, FreeParticle) {
  const HmcConfig cfg{7, 0.3, {2.0, 0.5}};
  const PhasePoint out = leapfrog({{1.0, -1.0}, {0.4, 0.1}}, cfg, flat_target(2));
  EXPECT_NEAR(out.x[0], 1.0 + 7 * 0.3 * 0.4 / 2.0, 1e-14);
  EXPECT_NEAR(out.x[1], -1.0 + 7 * 0.3 * 0.1 / 0.5, 1e-14);
  EXPECT_EQ(out.p, (Vector{0.4, 0.1}));
}

TEST(Leapfrog, ReversibleAtRandomPhasePoints) {
  const Target t = make_anisotropic_gaussian({1.0, 4.0, 9.0});
  LeapfrogCheckSpec spec;
  spec.n_steps = {5};
  spec.step_sizes = {0.1};
  EXPECT_TRUE(check_leapfrog_reversibility(t, spec).passed);
}

TEST(Leapfrog, NonFiniteGradientReportsStep) {
  // Constant pull to the right; the gradient blows up once x crosses 1.
  const Target t(
      "wall", 1, SupportKind::continuous, [](std::span<const double> x) { return x[0]; },
      [](std::span<const double> x, std::span<double> g) {
        g[0] = x[0] > 1.0 ? std::numeric_limits<double>::infinity() : 1.0;
      });
  try {
    leapfrog({{0.0}, {1.0}}, HmcConfig::unit_mass(1, 10, 0.3), t);
    FAIL() << "expected LeapfrogError";
  } catch (const LeapfrogError& e) {
    // x after steps 1..3: 0.345, 0.78, 1.305, so the gradient fails after step 3.
    EXPECT_EQ(e.step(), 3u);
  }
}

TEST(Hmc, KineticEnergyAndHamiltonian) {
  EXPECT_NEAR(kinetic_energy(Vector{1.0, 2.0}, Vector{2.0, 4.0}), 0.5 * (0.5 + 1.0), 1e-15);
  const Target t = make_iid_gaussian(1);
  EXPECT_NEAR(hamiltonian(t, {{1.0}, {1.0}}, Vector{1.0}) - hamiltonian(t, {{0.0}, {0.0}}, Vector{1.0}), 1.0, 1e-15);
}

TEST(Hmc, ValidatesConfig) {
  const Target t = make_iid_gaussian(2);
  EXPECT_THROW(make_hmc_kernel(t, HmcConfig{0, 0.1, {1.0, 1.0}}), ConfigError);
  EXPECT_THROW(make_hmc_kernel(t, HmcConfig{1, 0.0, {1.0, 1.0}}), ConfigError);
  EXPECT_THROW(make_hmc_kernel(t, HmcConfig{1, 0.1, {1.0}}), ConfigError);
  EXPECT_THROW(make_hmc_kernel(t, HmcConfig{1, 0.1, {1.0, 0.0}}), ConfigError);
}

TEST(Hmc, SmallStepConservesEnergy) {
  const Target t = make_iid_gaussian(5);
  const Trace tr = run_chain(make_hmc_kernel(t, HmcConfig::unit_mass(5, 10, 1e-4)), t, Vector(5, 0.5), 500, 4);
  EXPECT_EQ(acceptance_rate(tr), 1.0);
}

TEST(Hmc, EnergyErrorIsSecondOrder) {
  const Verdict v = check_energy_error_scaling(EnergyScalingSpec{});
  EXPECT_TRUE(v.passed) << v.details.dump();
  const double ratio = v.details["ratio"].get<double>();
  EXPECT_GT(ratio, 3.5);
  EXPECT_LT(ratio, 4.5);
}

TEST(Hmc, StationaryMomentsOnGaussian) {
  const Target t = make_iid_gaussian(10);
  const Trace tr = run_chain(make_hmc_kernel(t, HmcConfig::unit_mass(10, 10, 0.1)), t, Vector(10, 0.0), 200'000, 31);
  expect_moments(tr, 1000, 0.05, 0.1);
}

TEST(Hmc, DeterministicGivenSeed) {
  const Target t = make_iid_gaussian(3);
  const Kernel k = make_hmc_kernel(t, HmcConfig::unit_mass(3, 5, 0.2));
  EXPECT_EQ(run_chain(k, t, Vector(3, 1.0), 300, 8).states, run_chain(k, t, Vector(3, 1.0), 300, 8).states);
}

TEST(Hmc, ZeroGradientOneStepMatchesRwmh) {
  // With grad U = 0 and L = 1 the position proposal is x + dt p / m, p ~ N(0, m),
  // i.e. RWMH with sigma = dt / sqrt(m); both kernels consume one normal per
  // coordinate and then the acceptance uniform.
  const double dt = 0.6, m = 2.5;
  const Target flat = flat_target(3);
  const Trace h = run_chain(make_hmc_kernel(flat, HmcConfig{1, dt, Vector(3, m)}), flat, Vector(3, 0.0), 2000, 12);
  const Trace r = run_chain(make_rwmh_kernel(flat, RwmhConfig{dt / std::sqrt(m), {}}), flat, Vector(3, 0.0), 2000, 12);
  ASSERT_EQ(h.states.size(), r.states.size());
  for (std::size_t i = 0; i < h.states.size(); ++i) EXPECT_NEAR(h.states[i], r.states[i], 1e-12);
  EXPECT_EQ(h.accepted, r.accepted);
}

TEST(HmcOneStepLaw, ClosedFormParameters) {
  const Target t = make_iid_gaussian(3);
  const Vector mass{1.0, 2.0, 4.0};
  // dt = 1: mean_i = x_i - 1/(2 m_i) at x = 1 and var_i = 1/m_i.
  const GaussianProposal at_ones = hmc_one_step_proposal_params(Vector(3, 1.0), t, HmcConfig{1, 1.0, mass});
  const GaussianProposal at_zero = hmc_one_step_proposal_params(Vector(3, 0.0), t, HmcConfig{1, 1.0, mass});
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(at_ones.mean[i], 1.0 - 1.0 / (2.0 * mass[i]), 1e-15);
    EXPECT_EQ(at_zero.mean[i], 0.0);
    EXPECT_NEAR(at_zero.var[i], 1.0 / mass[i], 1e-15);
  }
  // General dt: the leapfrog-derived law has mean shift dt^2/(2m) and variance dt^2/m.
  const GaussianProposal half = hmc_one_step_proposal_params(Vector(3, 1.0), t, HmcConfig{1, 0.5, mass});
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(half.mean[i], 1.0 - 0.25 / (2.0 * mass[i]), 1e-15);
    EXPECT_NEAR(half.var[i], 0.25 / mass[i], 1e-15);
  }
  EXPECT_THROW(hmc_one_step_proposal_params(Vector(3, 0.0), t, HmcConfig{2, 0.5, mass}), ConfigError);
}

TEST(HmcOneStepLaw, EmpiricalMomentsMatch) {
  const Target t = make_anisotropic_gaussian({1.0, 3.0, 0.5});
  const Verdict v = check_hmc_one_step_law(t, Vector{1.0, -0.5, 2.0}, HmcConfig{1, 0.5, {1.0, 2.0, 0.5}}, 100'000, 77);
  EXPECT_TRUE(v.passed) << v.details.dump();
}
