#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "tmcmc/chain.hpp"
#include "tmcmc/diagnostics.hpp"
#include "tmcmc/suites.hpp"
#include "tmcmc/tmcmc_kernels.hpp"
#include "tmcmc/verify.hpp"

using namespace tmcmc;

namespace {

MoveType mt(std::initializer_list<int> v) {
  std::vector<std::int8_t> z;
  for (int x : v) z.push_back(static_cast<std::int8_t>(x));
  return MoveType(z);
}

MoveType random_move(Rng& rng, std::size_t k) {
  MoveType z(k);
  do {
    for (std::size_t i = 0; i < k; ++i) z.set(i, static_cast<int>(rng.index(3)) - 1);
  } while (z.is_zero());
  return z;
}

/// Log-scale family y_i = x_i exp(z_i a_i eps) on the positive orthant.
Transformation log_scale_transformation(Vector scales) {
  Transformation t;
  t.name = "log-scale";
  t.forward = [scales](std::span<const double> x, double eps, const MoveType& z, std::span<double> out) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * std::exp(z[i] * scales[i] * eps);
  };
  t.log_jacobian = [scales](std::span<const double>, double eps, const MoveType& z) {
    double s = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) s += z[i] * scales[i] * eps;
    return s;
  };
  return t;
}

}  // namespace

TEST(MoveType, ConjugateIsInvolution) {
  const MoveType z = mt({1, 0, -1});
  EXPECT_EQ(z.conjugate(), mt({-1, 0, 1}));
  EXPECT_EQ(z.conjugate().conjugate(), z);
  EXPECT_THROW(mt({2}), ConfigError);
  EXPECT_TRUE(MoveType(3).is_zero());
}

TEST(SampleEpsilon, HalfNormalMean) {
  Rng rng(1);
  double sum = 0.0;
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) {
    const double e = sample_epsilon(rng, 1.0);
    ASSERT_GE(e, 0.0);
    sum += e;
  }
  EXPECT_NEAR(sum / n, std::sqrt(2.0 / std::numbers::pi), 0.003);
}

TEST(SampleEpsilon, ScaleFamilyUnderSharedStream) {
  Rng a(9), b(9);
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(sample_epsilon(a, 2.0), 2.0 * sample_epsilon(b, 1.0));
  EXPECT_THROW(sample_epsilon(a, 0.0), ConfigError);
}

TEST(AdditiveForward, DirectSubstitution) {
  EXPECT_EQ(additive_forward(Vector{1.0, 2.0}, 0.5, mt({1, -1}), Vector{1.0, 1.0}), (Vector{1.5, 1.5}));
  EXPECT_EQ(additive_forward(Vector{3.0, -4.0}, 0.0, mt({1, -1}), Vector{2.0, 5.0}), (Vector{3.0, -4.0}));
  EXPECT_THROW(additive_forward(Vector{1.0}, 0.5, mt({1, 1}), Vector{1.0}), ConfigError);
}

TEST(AdditiveForward, InverseAndJacobianReciprocity) {
  Rng rng(5);
  const Vector a{0.5, 1.0, 2.0};
  const Transformation t = additive_transformation(a);
  for (int trial = 0; trial < 10'000; ++trial) {
    const Vector x{rng.normal(), rng.normal(), rng.normal()};
    const double eps = rng.half_normal(1.0);
    const MoveType z = random_move(rng, 3);
    const Vector y = t.apply(x, eps, z);
    const Vector back = t.apply(y, eps, z.conjugate());
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(back[i], x[i], 1e-12 * (1.0 + std::fabs(x[i])));
    EXPECT_EQ(t.log_jacobian(x, eps, z) + t.log_jacobian(y, eps, z.conjugate()), 0.0);
  }
}

TEST(UserTransformation, InverseAndJacobianReciprocity) {
  Rng rng(6);
  const Transformation t = log_scale_transformation({1.0, 0.5});
  for (int trial = 0; trial < 10'000; ++trial) {
    const Vector x{std::exp(rng.normal()), std::exp(rng.normal())};
    const double eps = rng.half_normal(1.0);
    const MoveType z = random_move(rng, 2);
    const Vector y = t.apply(x, eps, z);
    const Vector back = t.apply(y, eps, z.conjugate());
    for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(back[i], x[i], 1e-12 * x[i]);
    EXPECT_NEAR(t.log_jacobian(x, eps, z) + t.log_jacobian(y, eps, z.conjugate()), 0.0, 1e-12);
  }
}

TEST(MoveProbabilities, RatioSwapsForwardAndBackward) {
  const MoveProbabilities probs{{0.2, 0.6}, {0.5, 0.3}};
  EXPECT_NEAR(log_move_ratio(mt({1, 1}), probs), std::log(0.5 / 0.2) + std::log(0.3 / 0.6), 1e-15);
  EXPECT_NEAR(log_move_ratio(mt({-1, 0}), probs), std::log(0.2 / 0.5), 1e-15);
  EXPECT_EQ(log_move_ratio(mt({1, -1}), MoveProbabilities::symmetric(2)), 0.0);
  EXPECT_THROW((MoveProbabilities{{0.7}, {0.5}}.validate(1)), ConfigError);
}

TEST(MoveProbabilities, SamplerNeverReturnsAllZero) {
  Rng rng(2);
  const MoveProbabilities probs{{0.05, 0.05}, {0.05, 0.05}};
  for (int i = 0; i < 20'000; ++i) EXPECT_FALSE(sample_move_type(rng, probs).is_zero());
}

TEST(MoveProbabilities, SamplerFrequenciesConditionalOnNonZero) {
  // k = 1: z = +1 w.p. p / (p + q) after discarding zeros.
  Rng rng(3);
  const MoveProbabilities probs{{0.3}, {0.1}};
  int plus = 0;
  const int n = 200'000;
  for (int i = 0; i < n; ++i) plus += sample_move_type(rng, probs)[0] == 1;
  EXPECT_NEAR(static_cast<double>(plus) / n, 0.75, 4.0 * std::sqrt(0.75 * 0.25 / n));
}

TEST(Softmax, SymmetricDegenerateAndOverflowSafe) {
  const MoveProbabilities p = softmax_move_probabilities(Vector{0.0}, Vector{0.0}, Vector{0.0});
  EXPECT_NEAR(p.forward[0], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(p.backward[0], 1.0 / 3.0, 1e-15);
  const MoveProbabilities big = softmax_move_probabilities(Vector{1000.0}, Vector{999.0}, Vector{-1000.0});
  EXPECT_TRUE(std::isfinite(big.forward[0]));
  EXPECT_NEAR(big.forward[0] + big.backward[0], 1.0, 1e-15);
  EXPECT_NEAR(big.forward[0] / big.backward[0], std::exp(1.0), 1e-12);
  // Ratio for an all-forward move is prod q_i / p_i.
  const MoveProbabilities pq = softmax_move_probabilities(Vector{0.3, -0.2}, Vector{-0.1, 0.4}, Vector{0.0, 0.0});
  const double expected = std::log(pq.backward[0] / pq.forward[0]) + std::log(pq.backward[1] / pq.forward[1]);
  EXPECT_NEAR(log_move_ratio(mt({1, 1}), pq), expected, 1e-14);
}

TEST(AdditiveTmcmc, SymmetricMoveRatioGivesDensityRatio) {
  const Target t = make_iid_gaussian(3);
  const TmcmcConfig cfg = TmcmcConfig::symmetric(3, 0.8);
  Rng rng(12), replay(12);
  ChainState s = ChainState::at(t, Vector{0.3, -0.1, 1.2});
  for (int i = 0; i < 200; ++i) {
    const ChainState before = s;
    const StepInfo info = additive_tmcmc_step(s, t, cfg, rng);
    // Replay the RNG draws to rebuild the proposal.
    const double eps = sample_epsilon(replay, 0.8);
    MoveType z(3);
    for (std::size_t c = 0; c < 3; ++c) z.set(c, replay.uniform() < 0.5 ? 1 : -1);
    const Vector y = additive_forward(before.x, eps, z, cfg.scales);
    const double log_u = std::log(replay.uniform());
    EXPECT_NEAR(info.log_alpha, std::min(0.0, t.log_density(y) - before.log_density), 1e-12);
    EXPECT_EQ(info.log_u, log_u);
    EXPECT_EQ(info.accepted, log_u < info.log_alpha);
    EXPECT_EQ(s.x, info.accepted ? y : before.x);
  }
}

TEST(AdditiveTmcmc, UnitStepFromOrigin) {
  // k = 1, x = 0, eps = 1, z = +1: alpha = pi(1) / pi(0) = exp(-1/2).
  const Target t = make_iid_gaussian(1);
  EXPECT_NEAR(mh_log_alpha(t.log_density(Vector{0.0}), t.log_density(Vector{1.0})), -0.5, 1e-15);
}

TEST(AdditiveTmcmc, TinyEpsAtModeAlwaysAccepts) {
  const Target t = make_iid_gaussian(4);
  const Kernel k = make_additive_tmcmc_kernel(t, TmcmcConfig::symmetric(4, 1e-9));
  const Trace tr = run_chain(k, t, Vector(4, 0.0), 2000, 3);
  EXPECT_GT(acceptance_rate(tr), 0.999);
}

TEST(AdditiveTmcmc, RejectsInvalidConfig) {
  const Target t = make_iid_gaussian(2);
  TmcmcConfig cfg = TmcmcConfig::symmetric(2, 1.0);
  cfg.move_probs = {{0.3, 0.3}, {0.3, 0.3}};
  EXPECT_THROW(make_additive_tmcmc_kernel(t, cfg), ConfigError);
  EXPECT_THROW(make_additive_tmcmc_kernel(t, TmcmcConfig::symmetric(2, 0.0)), ConfigError);
  EXPECT_THROW(make_additive_tmcmc_kernel(t, TmcmcConfig::symmetric(3, 1.0)), ConfigError);
}

TEST(GeneralTmcmc, SpecializesToAdditiveUnderSharedStream) {
  const Target t = make_iid_gaussian(5);
  TmcmcConfig cfg = TmcmcConfig::symmetric(5, 0.9);
  cfg.move_probs = {Vector(5, 0.7), Vector(5, 0.3)};
  const Trace a = run_chain(make_additive_tmcmc_kernel(t, cfg), t, Vector(5, 0.5), 5000, 21, {{}, false});
  const Trace b = run_chain(make_general_tmcmc_kernel(t, additive_transformation(cfg.scales), cfg), t,
                            Vector(5, 0.5), 5000, 21, {{}, false});
  EXPECT_EQ(a.states, b.states);
  EXPECT_EQ(a.accepted, b.accepted);
}

TEST(GeneralTmcmc, ZeroCoordinatesStayPut) {
  const Target t = make_iid_gaussian(3);
  TmcmcConfig cfg = TmcmcConfig::symmetric(3, 1.0);
  cfg.move_probs = {{0.5, 0.0, 0.2}, {0.5, 0.0, 0.2}};  // coordinate 1 never moves
  const Trace tr = run_chain(make_general_tmcmc_kernel(t, additive_transformation(cfg.scales), cfg), t,
                             Vector{0.0, 0.7, 0.0}, 3000, 4);
  for (std::size_t it = 0; it < tr.size(); ++it) EXPECT_EQ(tr.at(it, 1), 0.7);
  EXPECT_GT(acceptance_rate(tr), 0.1);
}

TEST(GeneralTmcmc, NonFiniteJacobianRejects) {
  const Target t = make_iid_gaussian(1);
  Transformation bad = additive_transformation({1.0});
  bad.log_jacobian = [](std::span<const double>, double, const MoveType&) { return std::nan(""); };
  ChainState s = ChainState::at(t, Vector{0.0});
  Rng rng(1);
  const StepInfo info = general_tmcmc_step(s, t, bad, TmcmcConfig::symmetric(1, 1.0), rng);
  EXPECT_FALSE(info.accepted);
  EXPECT_TRUE(info.nonfinite_jacobian);
  EXPECT_EQ(s.x, Vector{0.0});
}

TEST(GeneralTmcmc, LogScaleFamilyTargetsLogNormal) {
  // On the positive orthant, x = exp(N(0,1)) has log density -log x - (log x)^2 / 2.
  const Target lognormal("lognormal", 1, SupportKind::continuous, [](std::span<const double> x) {
    if (!(x[0] > 0.0)) return -std::numeric_limits<double>::infinity();
    const double l = std::log(x[0]);
    return -l - 0.5 * l * l;
  });
  const TmcmcConfig cfg = TmcmcConfig::symmetric(1, 1.5);
  const Trace tr = run_chain(make_general_tmcmc_kernel(lognormal, log_scale_transformation({1.0}), cfg), lognormal,
                             Vector{1.0}, 200'000, 8);
  double m = 0.0, m2 = 0.0;
  const auto s = tr.series(0, 10'000);
  for (double v : s) {
    m += std::log(v);
    m2 += std::log(v) * std::log(v);
  }
  m /= static_cast<double>(s.size());
  m2 /= static_cast<double>(s.size());
  EXPECT_NEAR(m, 0.0, 0.05);
  EXPECT_NEAR(m2 - m * m, 1.0, 0.1);
}

TEST(DependentZ, DegenerateConfigHasUnitMoveRatio) {
  // With var -> 0 every w_j ~ 0, so p_i = q_i = 1/3 and any move has ratio 1.
  const DependentZConfig cfg = dependent_z_config(0.0, 0.0, 0.0, 1e-24);
  Rng rng(4);
  Vector w1(1), w2(1), w3(1);
  cfg.w1.sample(rng, w1);
  cfg.w2.sample(rng, w2);
  cfg.w3.sample(rng, w3);
  const MoveProbabilities p = softmax_move_probabilities(w1, w2, w3);
  EXPECT_NEAR(p.forward[0], 1.0 / 3.0, 1e-10);
  EXPECT_NEAR(log_move_ratio(mt({1}), p), 0.0, 1e-10);
}

TEST(DependentZ, RejectsBadConfig) {
  EXPECT_THROW(GaussianSpec::diagonal({0.0}, {0.0}), ConfigError);
  Eigen::MatrixXd not_pd(2, 2);
  not_pd << 1.0, 2.0, 2.0, 1.0;
  EXPECT_THROW(GaussianSpec({0.0, 0.0}, not_pd), ConfigError);
  DependentZConfig cfg = dependent_z_config(0.0, 0.0, 0.0, 1.0);
  EXPECT_THROW(make_dependent_z_kernel(make_iid_gaussian(2), cfg), ConfigError);
}

TEST(DependentZ, StationaryMomentsOnGaussian) {
  const Target t = make_iid_gaussian(3);
  DependentZConfig cfg;
  cfg.w1 = GaussianSpec::diagonal(Vector(3, 0.8), Vector(3, 0.5));
  cfg.w2 = GaussianSpec::diagonal(Vector(3, -0.4), Vector(3, 0.5));
  cfg.w3 = GaussianSpec::diagonal(Vector(3, 0.1), Vector(3, 0.5));
  cfg.eps_scale = 1.2;
  cfg.scales = Vector(3, 1.0);
  const Trace tr = run_chain(make_dependent_z_kernel(t, cfg), t, Vector(3, 0.0), 200'000, 17);
  for (std::size_t c = 0; c < 3; ++c) {
    const auto s = tr.series(c, 10'000);
    double m = 0.0, m2 = 0.0;
    for (double v : s) {
      m += v;
      m2 += v * v;
    }
    m /= static_cast<double>(s.size());
    m2 /= static_cast<double>(s.size());
    EXPECT_NEAR(m, 0.0, 0.05) << "coordinate " << c;
    EXPECT_NEAR(m2 - m * m, 1.0, 0.1) << "coordinate " << c;
  }
}

TEST(RunChain, LengthDeterminismAndValidation) {
  const Target t = make_iid_gaussian(2);
  const Kernel k = make_additive_tmcmc_kernel(t, TmcmcConfig::symmetric(2, 1.0));
  EXPECT_EQ(run_chain(k, t, Vector(2, 0.0), 1, 1).size(), 1u);
  const Trace a = run_chain(k, t, Vector(2, 0.0), 1000, 99);
  const Trace b = run_chain(k, t, Vector(2, 0.0), 1000, 99);
  EXPECT_EQ(a.states, b.states);
  EXPECT_EQ(a.log_density, b.log_density);
  EXPECT_EQ(a.accepted, b.accepted);
  EXPECT_THROW(run_chain(k, t, Vector(2, 0.0), 0, 1), ConfigError);
  EXPECT_THROW(run_chain(k, t, Vector(3, 0.0), 10, 1), ConfigError);
  EXPECT_THROW(run_chain(k, t, Vector{0.0, std::nan("")}, 10, 1), ConfigError);
}

TEST(RunChain, StationaryMomentsAdditiveTmcmc) {
  const Target t = make_iid_gaussian(5);
  const Trace tr =
      run_chain(make_additive_tmcmc_kernel(t, TmcmcConfig::symmetric(5, 2.4 / std::sqrt(5.0))), t, Vector(5, 0.0),
                200'000, 2024);
  for (std::size_t c = 0; c < 5; ++c) {
    const auto s = tr.series(c, 10'000);
    double m = 0.0, m2 = 0.0;
    for (double v : s) {
      m += v;
      m2 += v * v;
    }
    m /= static_cast<double>(s.size());
    m2 /= static_cast<double>(s.size());
    EXPECT_NEAR(m, 0.0, 0.05);
    EXPECT_NEAR(m2 - m * m, 1.0, 0.1);
  }
}

TEST(RunChain, NegInfProposalsNeverProduceNan) {
  // Half-line target: proposals below zero have log density -inf.
  const Target half("half-normal", 1, SupportKind::continuous, [](std::span<const double> x) {
    return x[0] < 0.0 ? -std::numeric_limits<double>::infinity() : -0.5 * x[0] * x[0];
  });
  const Target nan_target("nan-left", 1, SupportKind::continuous, [](std::span<const double> x) {
    return x[0] < 0.0 ? std::nan("") : -0.5 * x[0] * x[0];
  });
  for (const Target* t : {&half, &nan_target}) {
    const Trace tr = run_chain(make_additive_tmcmc_kernel(*t, TmcmcConfig::symmetric(1, 2.0)), *t, Vector{0.5},
                               20'000, 5);
    EXPECT_GT(tr.nonfinite_proposals, 0u);
    for (std::size_t i = 0; i < tr.size(); ++i) {
      ASSERT_FALSE(std::isnan(tr.at(i, 0)));
      ASSERT_FALSE(std::isnan(tr.log_density[i]));
      ASSERT_GE(tr.at(i, 0), 0.0);
    }
  }
}

TEST(DetailedBalance, GridSurrogateAdditiveTmcmc) {
  const Target t = make_iid_gaussian(1);
  const GridSpec grid;
  const Eigen::VectorXd pi = grid_masses(t, grid);
  for (double p : {0.5, 0.7, 0.2}) {
    TmcmcConfig cfg = TmcmcConfig::symmetric(1, 1.0);
    cfg.move_probs = {{p}, {1.0 - p}};
    const Verdict v = check_detailed_balance_discretized(additive_tmcmc_grid_kernel(t, grid, cfg), pi, "grid");
    EXPECT_TRUE(v.passed) << "p = " << p << " violation " << v.max_violation;
  }
}

TEST(DetailedBalance, TwoDimGeneralKernelOnDiscreteEps) {
  // k = 2 general kernel with z in {-1,0,1}^2 and eps on a finite grid: build
  // the exact matrix on a 7 x 7 grid of spacing h and check balance.
  const Target t = make_anisotropic_gaussian({1.0, 2.0});
  const int side = 7;
  const double h = 0.5;
  const Vector eps_grid{h, 2 * h, 3 * h};
  const Vector eps_w{0.5, 0.3, 0.2};
  TmcmcConfig cfg = TmcmcConfig::symmetric(2, 1.0);
  cfg.move_probs = {{0.4, 0.3}, {0.2, 0.5}};
  const Transformation tr = additive_transformation(cfg.scales);
  auto coord = [&](std::size_t idx) {
    return Vector{(static_cast<double>(idx % side) - 3.0) * h, (static_cast<double>(idx / side) - 3.0) * h};
  };
  double z_norm = 1.0;
  for (std::size_t i = 0; i < 2; ++i) z_norm *= cfg.move_probs.prob(i, 0);
  FiniteKernel fk;
  fk.n_states = side * side;
  fk.branches = [&](std::size_t i, std::vector<ProposalBranch>& out) {
    const Vector x = coord(i);
    for (int z0 = -1; z0 <= 1; ++z0) {
      for (int z1 = -1; z1 <= 1; ++z1) {
        if (z0 == 0 && z1 == 0) continue;
        const MoveType z = mt({z0, z1});
        const double pz = cfg.move_probs.prob(0, z0) * cfg.move_probs.prob(1, z1) / (1.0 - z_norm);
        for (std::size_t e = 0; e < eps_grid.size(); ++e) {
          const Vector y = tr.apply(x, eps_grid[e], z);
          const double u0 = y[0] / h + 3.0, u1 = y[1] / h + 3.0;
          ProposalBranch b;
          b.prob = pz * eps_w[e];
          if (u0 >= -0.5 && u0 < side - 0.5 && u1 >= -0.5 && u1 < side - 0.5) {
            b.to = static_cast<std::size_t>(std::lround(u0)) + side * static_cast<std::size_t>(std::lround(u1));
            b.log_alpha = mh_log_alpha(t.log_density(x), t.log_density(y), log_move_ratio(z, cfg.move_probs),
                                       tr.log_jacobian(x, eps_grid[e], z));
          }
          out.push_back(b);
        }
      }
    }
  };
  const Eigen::MatrixXd k = exact_transition_matrix(fk);
  const Eigen::VectorXd pi = normalized_masses(t, fk.n_states, coord);
  EXPECT_TRUE(check_detailed_balance_exact(k, pi, "general-k2").passed);
  EXPECT_TRUE(check_stationarity(k, pi, "general-k2-stationarity").passed);
}

TEST(Reachability, TwoStepRotationsAndQuadrants) {
  const Verdict v = check_two_step_reachability(ReachabilitySpec{});
  EXPECT_TRUE(v.passed) << v.details.dump();
  // M_1 (1, 1)' = (2, 0): step (+1, +1) then (+1, -1).
  const auto d = two_step_displacement(rotation_matrices()[0], 1.0, 1.0, Vector{0.0, 0.0});
  EXPECT_EQ(d[0], 2.0);
  EXPECT_EQ(d[1], 0.0);
}

TEST(Reachability, OneStepMovesStayOnTheDiagonals) {
  // From x1 < x2 with a shared eps, one step never lands on x1' > 0 > x2' when
  // both coordinates move in the same direction.
  Rng rng(7);
  for (int t = 0; t < 10'000; ++t) {
    const double a = -rng.half_normal(1.0), b = a + rng.half_normal(1.0);
    const double eps = rng.half_normal(2.0);
    for (int s : {-1, 1}) {
      const Vector y = additive_forward(Vector{a, b}, eps, mt({s, s}), Vector{1.0, 1.0});
      EXPECT_FALSE(y[0] > 0.0 && y[1] < 0.0);
    }
  }
}
