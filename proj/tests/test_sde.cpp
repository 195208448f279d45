#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "imm/clocks.hpp"
#include "imm/rng.hpp"
#include "imm/sde.hpp"
#include "imm/stats.hpp"

using namespace imm;

namespace {

struct Moments {
  double mean, var, mean_se, var_se;
};

template <class Draw>
Moments moments(std::size_t n, Draw&& draw) {
  double s1 = 0, s2 = 0;
  std::vector<double> x(n);
  for (auto& v : x) {
    v = draw();
    s1 += v;
  }
  const double m = s1 / static_cast<double>(n);
  double m4 = 0;
  for (double v : x) {
    const double d = v - m;
    s2 += d * d;
    m4 += d * d * d * d;
  }
  const double var = s2 / static_cast<double>(n - 1);
  m4 /= static_cast<double>(n);
  return {m, var, std::sqrt(var / static_cast<double>(n)),
          std::sqrt((m4 - var * var) / static_cast<double>(n))};
}

MarketConfig info_config(std::size_t n) {
  MarketConfig cfg;
  cfg.n = n;
  cfg.risk_premium_factors.assign(n, 1.0 / static_cast<double>(n));
  return cfg;
}

}  // namespace

TEST(RngStream, Reproducible) {
  RngStream a(42, 7), b(42, 7), c(42, 8);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    EXPECT_EQ(x, b());
    differs = differs || x != c();
  }
  EXPECT_TRUE(differs);
}

TEST(TransitionLaw, MatchesCirFormulas) {
  const SquareRootSpec s{2.0, 0.5, 1.0, 1.0};
  const auto law = transition_law(s, 0.7, 0.3);
  EXPECT_NEAR(law.scale, (1 - std::exp(-0.3)) / 4.0, 1e-15);
  EXPECT_NEAR(law.noncentrality, 0.7 * std::exp(-0.3) / law.scale, 1e-12);
  EXPECT_NEAR(law.mean(), square_root_mean(s, 0.7, 0.3), 1e-14);
  EXPECT_NEAR(law.variance(), square_root_variance(s, 0.7, 0.3), 1e-14);
}

TEST(ExactSampler, ConditionalMomentsFourStandardErrors) {
  struct Case {
    SquareRootSpec spec;
    double y0, h;
  };
  const std::vector<Case> cases = {
      {SquareRootSpec::from_mean(1.0), 1.0, 1.0},
      {SquareRootSpec::from_mean(0.2), 0.05, 0.5},
      {SquareRootSpec::from_mean(0.5, 3.0, 0.7), 2.0, 0.2},
  };
  RngStream rng(1, 0);
  for (const auto& c : cases) {
    const auto m = moments(1000000, [&] { return sample_srou_exact(c.spec, c.y0, c.h, rng); });
    EXPECT_NEAR(m.mean, square_root_mean(c.spec, c.y0, c.h), 4 * m.mean_se);
    EXPECT_NEAR(m.var, square_root_variance(c.spec, c.y0, c.h), 4 * m.var_se);
  }
}

TEST(ExactSampler, ZeroStepContinuity) {
  RngStream rng(2, 0);
  const auto s = SquareRootSpec::from_mean(1.0);
  for (int i = 0; i < 100; ++i) EXPECT_NEAR(sample_srou_exact(s, 1.0, 1e-10, rng), 1.0, 1e-3);
}

TEST(ExactSampler, StartAtZeroDimensionTwo) {
  RngStream rng(3, 0);
  const auto s = SquareRootSpec::normalized_atom(2);
  const auto m = moments(200000, [&] {
    const double y = sample_srou_exact(s, 0.0, 1.0, rng);
    EXPECT_GT(y, 0.0);
    return y;
  });
  EXPECT_NEAR(m.mean, 0.5 * (1 - std::exp(-1.0)), 4 * m.mean_se);
}

TEST(ExactSampler, RejectsBadInput) {
  RngStream rng(4, 0);
  const auto s = SquareRootSpec::from_mean(1.0);
  EXPECT_THROW(sample_srou_exact(s, -1.0, 1.0, rng), std::invalid_argument);
  EXPECT_THROW(sample_srou_exact(s, 1.0, 0.0, rng), std::invalid_argument);
  EXPECT_THROW(sample_srou_exact(s, NAN, 1.0, rng), std::invalid_argument);
  EXPECT_THROW(sample_srou_exact(SquareRootSpec{NAN, 1, 1, 1}, 1.0, 1.0, rng), std::invalid_argument);
}

TEST(BesqSampler, MeanIsLinear) {
  RngStream rng(5, 0);
  const auto m = moments(200000, [&] { return sample_besq(4.0, 1.5, 2.0, rng); });
  EXPECT_NEAR(m.mean, 1.5 + 4.0 * 2.0, 4 * m.mean_se);
  EXPECT_NEAR(m.var, 4 * 1.5 * 2.0 + 2 * 4.0 * 4.0, 4 * m.var_se);
}

TEST(EulerSampler, MatchesExactMoments) {
  const auto s = SquareRootSpec::from_mean(1.0);
  RngStream rng(6, 0);
  const auto m = moments(100000, [&] { return sample_srou_euler(s, 1.0, 0.5, 256, rng); });
  EXPECT_NEAR(m.mean, square_root_mean(s, 1.0, 0.5), 4 * m.mean_se);
  EXPECT_NEAR(m.var, square_root_variance(s, 1.0, 0.5), 4 * m.var_se);
}

TEST(EulerSampler, NonNegativeFromZero) {
  RngStream rng(7, 0);
  const auto s = SquareRootSpec::from_mean(0.2);
  for (int i = 0; i < 10000; ++i) EXPECT_GE(sample_srou_euler(s, 0.0, 0.3, 4, rng), 0.0);
}

TEST(EulerSampler, OneStepMean) {
  RngStream rng(8, 0);
  const auto s = SquareRootSpec::from_mean(1.0);
  const double h = 1e-3, y0 = 2.0;
  const auto m = moments(200000, [&] { return sample_srou_euler(s, y0, h, 1, rng); });
  EXPECT_NEAR(m.mean, y0 + (1.0 - y0) * h, 4 * m.mean_se);
}

TEST(EulerSampler, TwoSampleKsAgainstExact) {
  for (double d : {2.0, 4.0}) {
    for (double h : {0.1, 1.0}) {
      const auto s = SquareRootSpec::from_mean(d / 4.0);
      RngStream ra(9, 0), rb(9, 1);
      std::vector<double> exact(10000), euler(10000);
      for (auto& v : exact) v = sample_srou_exact(s, s.mean, h, ra);
      for (auto& v : euler) v = sample_srou_euler(s, s.mean, h, 512, rb);
      const auto ks = ks_two_sample(exact, euler);
      EXPECT_FALSE(ks.rejects(0.01)) << "d=" << d << " h=" << h << " p=" << ks.p_value;
    }
  }
}

// Below dimension 2 the truncated scheme leaves an atom at zero that the
// exact law does not have. Away from zero the two laws agree, and the KS
// distance is the size of that atom.
TEST(EulerSampler, LowDimensionDiscrepancyIsTheZeroAtom) {
  const double d = 0.8;
  for (double h : {0.1, 1.0}) {
    const auto s = SquareRootSpec::from_mean(d / 4.0);
    RngStream ra(10, 0), rb(10, 1);
    std::vector<double> exact(10000), euler(10000);
    for (auto& v : exact) v = sample_srou_exact(s, s.mean, h, ra);
    double zeros = 0;
    for (auto& v : euler) {
      v = sample_srou_euler(s, s.mean, h, 512, rb);
      zeros += v == 0.0;
    }
    zeros /= static_cast<double>(euler.size());
    const auto ks = ks_two_sample(exact, euler);
    EXPECT_NEAR(ks.statistic, zeros, 0.015) << "h=" << h;

    std::vector<double> ea, ua;
    for (double v : exact) if (v > 0.05) ea.push_back(v);
    for (double v : euler) if (v > 0.05) ua.push_back(v);
    EXPECT_FALSE(ks_two_sample(ea, ua).rejects(0.01)) << "h=" << h;
  }
}

TEST(SimulateMarket, TimeAverageOfSingleAtom) {
  auto cfg = info_config(1);
  cfg.activity = {{ConstantActivity{0.2}}, true};
  cfg.interest_rate = ConstantRate{0.03};
  cfg.net_risk_adjusted_return = 0.05;
  cfg.horizon = 200.0;
  cfg.grid_step = 0.1;
  cfg.paths = 1000;
  const auto avg = map_paths(cfg, [](const MarketPath& p, std::size_t) {
    double s = 0;
    for (std::size_t i = 0; i + 1 < p.points(); ++i) s += 0.5 * (p.normalized[0][i] + p.normalized[0][i + 1]);
    return s / static_cast<double>(p.points() - 1);
  });
  const auto m = mean_and_se(avg);
  EXPECT_NEAR(m.mean, 1.0, 0.02);
}

TEST(SimulateMarket, FourAtomLongRunMeans) {
  auto cfg = info_config(4);
  cfg.activity = {{ConstantActivity{1.0}}, true};
  cfg.horizon = 500.0;
  cfg.grid_step = 0.5;
  cfg.paths = 100;
  const auto per_path = map_paths(cfg, [](const MarketPath& p, std::size_t) {
    std::vector<double> s(p.atoms(), 0.0);
    for (std::size_t k = 0; k < p.atoms(); ++k) {
      for (std::size_t i = 0; i + 1 < p.points(); ++i) s[k] += p.normalized[k][i];
      s[k] /= static_cast<double>(p.points() - 1);
    }
    return s;
  });
  for (std::size_t k = 0; k < 4; ++k) {
    std::vector<double> v;
    for (const auto& s : per_path) v.push_back(s[k]);
    EXPECT_NEAR(mean_and_se(v).mean, 0.25, 0.02 * 0.25);
  }
}

TEST(SimulateMarket, DeterministicAcrossWorkers) {
  auto cfg = info_config(3);
  cfg.activity = {{CirActivity{0.2, 5.0, 0.2, 0.4}}, true};
  cfg.horizon = 5.0;
  cfg.grid_step = 0.05;
  cfg.paths = 9;
  cfg.seed = 99;
  const auto a = simulate_market(cfg, 1);
  const auto b = simulate_market(cfg, 4);
  ASSERT_EQ(a.paths.size(), b.paths.size());
  for (std::size_t p = 0; p < a.paths.size(); ++p) {
    EXPECT_EQ(a.paths[p].normalized, b.paths[p].normalized);
    EXPECT_EQ(a.paths[p].log_value, b.paths[p].log_value);
  }
}

TEST(SimulateMarket, GeneralModeWithPolynomialPhi) {
  MarketConfig cfg;
  cfg.n = 2;
  cfg.mode = Mode::general_stationary;
  cfg.risk_premium_factors = {0.6, 0.4};
  cfg.volatility_function.coefficients = {0.0, 0.0, 1.0};
  cfg.initial_values = std::vector<double>{0.6, 0.4};
  cfg.activity = {{ConstantActivity{0.5}, ConstantActivity{0.3}}, false};
  cfg.horizon = 5.0;
  cfg.grid_step = 0.05;
  const auto p = simulate_path(cfg, 0);
  EXPECT_LE(reconstruction_error(p), 1e-10);
  EXPECT_EQ(p.atom_activity.size(), 2u);
  EXPECT_NEAR(p.activity[0], average_activity({0.6, 0.4}, {0.5, 0.3}), 1e-14);
}

TEST(GridWarnings, CoarseGrid) {
  auto cfg = info_config(1);
  cfg.activity = {{CirActivity{0.2, 20.0, 0.2, 0.5}}, true};
  cfg.grid_step = 0.1;
  EXPECT_FALSE(grid_warnings(cfg).empty());
  cfg.grid_step = 0.01;
  EXPECT_TRUE(grid_warnings(cfg).empty());
}

TEST(IntrinsicTime, ClosedFormForConstantActivity) {
  auto cfg = info_config(1);
  const double a = 0.3;
  cfg.activity = {{ConstantActivity{a}}, true};
  cfg.horizon = 4.0;
  cfg.grid_step = 0.01;
  const auto p = simulate_path(cfg, 0);
  const auto phi = intrinsic_time(cfg, p, AtomClock{0});
  for (std::size_t i = 0; i < p.points(); ++i) {
    const double t = static_cast<double>(i) * cfg.grid_step;
    EXPECT_NEAR(phi[i], (std::exp(a * t) - 1.0) / 4.0, 1e-12);
    if (i > 0) EXPECT_GT(phi[i], phi[i - 1]);
  }
}

TEST(IntrinsicTime, FrozenAtZeroActivityLimit) {
  auto cfg = info_config(2);
  cfg.activity = {{ConstantActivity{1e-12}}, true};
  cfg.horizon = 1.0;
  cfg.grid_step = 0.1;
  const auto p = simulate_path(cfg, 0);
  const auto phi = intrinsic_time(cfg, p, AtomSetClock{{0, 1}});
  EXPECT_LT(phi.back(), 1e-11);
}

TEST(IntrinsicTime, AtomGopClockIncreases) {
  auto cfg = info_config(3);
  cfg.activity = {{ConstantActivity{0.5}}, true};
  cfg.net_risk_adjusted_return = 0.05;
  cfg.horizon = 2.0;
  cfg.grid_step = 0.01;
  const auto p = simulate_path(cfg, 0);
  const auto phi = intrinsic_time(cfg, p, AtomGopClock{});
  for (std::size_t i = 1; i < phi.size(); ++i) EXPECT_GT(phi[i], phi[i - 1]);
}
