#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "imm/information.hpp"
#include "imm/rng.hpp"
#include "imm/sde.hpp"
#include "imm/stats.hpp"

using namespace imm;

namespace {

std::vector<double> gamma_draws(std::uint64_t seed, std::size_t n, const GammaLaw& law) {
  RngStream rng(seed, 0);
  std::vector<double> x(n);
  for (auto& v : x) v = law.sample(rng);
  return x;
}

MarketConfig info_config(std::size_t n, std::size_t paths, double horizon, double dt) {
  MarketConfig cfg;
  cfg.n = n;
  cfg.risk_premium_factors.assign(n, 1.0 / static_cast<double>(n));
  cfg.activity = {{CirActivity{1.0, 2.0, 1.0, 0.5}}, true};
  cfg.interest_rate = ConstantRate{0.03};
  cfg.net_risk_adjusted_return = 0.05;
  cfg.horizon = horizon;
  cfg.grid_step = dt;
  cfg.paths = paths;
  cfg.seed = 21;
  return cfg;
}

}  // namespace

TEST(Kolmogorov, KnownQuantiles) {
  EXPECT_NEAR(kolmogorov_survival(1.3581), 0.05, 2e-4);
  EXPECT_NEAR(kolmogorov_survival(1.6276), 0.01, 5e-5);
  EXPECT_NEAR(kolmogorov_survival(0.8276), 0.5, 1e-3);
  // the two series agree where they switch
  EXPECT_NEAR(kolmogorov_survival(1.1799999), kolmogorov_survival(1.18), 1e-6);
  EXPECT_EQ(kolmogorov_survival(0.0), 1.0);
}

TEST(KsOneSample, NullRejectionRateOverSeeds) {
  const GammaLaw law{2.0, 2.0};
  int rejections = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    if (ks_one_sample(gamma_draws(seed, 10000, law), law).rejects(0.01)) ++rejections;
  }
  // 1% +- 1 point over 200 seeds
  EXPECT_LE(rejections, 4);
}

TEST(KsTwoSample, NullRejectionRateOverSeeds) {
  const GammaLaw law{0.8, 2.0};
  int rejections = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto ks = ks_two_sample(gamma_draws(2 * seed + 1000, 5000, law), gamma_draws(2 * seed + 1001, 5000, law));
    if (ks.rejects(0.01)) ++rejections;
  }
  EXPECT_LE(rejections, 4);
}

TEST(KsTwoSample, IdenticalSamplesGiveZero) {
  const auto x = gamma_draws(1, 1000, GammaLaw{2.0, 2.0});
  const auto ks = ks_two_sample(x, x);
  EXPECT_EQ(ks.statistic, 0.0);
  EXPECT_EQ(ks.p_value, 1.0);
}

TEST(KsTwoSample, SeparatedLawsReject) {
  const auto a = gamma_draws(1, 2000, GammaLaw{2.0, 2.0});
  const auto b = gamma_draws(2, 2000, GammaLaw{2.0, 1.6});
  EXPECT_TRUE(ks_two_sample(a, b).rejects(0.01));
}

TEST(KsOneSample, WrongLawRejectsAndTooFewSamplesThrow) {
  const auto x = gamma_draws(3, 20000, GammaLaw{2.0, 2.0});
  EXPECT_TRUE(ks_one_sample(x, GammaLaw{1.8, 1.8}).rejects(0.01));
  EXPECT_THROW(ks_one_sample(std::vector<double>(99, 1.0), GammaLaw{2.0, 2.0}), std::invalid_argument);
  EXPECT_THROW(ks_two_sample(std::vector<double>(99, 1.0), x), std::invalid_argument);
}

TEST(StudentT, RecoversFourDegreesOfFreedom) {
  std::mt19937_64 eng(4);
  std::student_t_distribution<double> t(4.0);
  std::vector<double> x(100000);
  for (auto& v : x) v = 0.001 + 0.02 * t(eng);
  const auto f = student_t_fit(x, 1.0 / 52.0);
  EXPECT_GE(f.df, 3.7);
  EXPECT_LE(f.df, 4.3);
  EXPECT_NEAR(f.location, 0.001, 5 * f.location_se);
  EXPECT_NEAR(f.scale, 0.02, 5 * f.scale_se);
  EXPECT_GT(f.df_se, 0.0);
  EXPECT_TRUE(f.converged);
  EXPECT_FALSE(f.at_boundary);
}

TEST(StudentT, GaussianDataGiveLargeDf) {
  std::mt19937_64 eng(5);
  std::normal_distribution<double> n;
  std::vector<double> x(50000);
  for (auto& v : x) v = n(eng);
  EXPECT_GT(student_t_fit(x).df, 20.0);
}

TEST(StudentT, RejectsBadInput) {
  EXPECT_THROW(student_t_fit(std::vector<double>(9999, 0.1)), std::invalid_argument);
  std::vector<double> x(20000, 0.1);
  x[3] = std::nan("");
  EXPECT_THROW(student_t_fit(x), std::invalid_argument);
}

TEST(Growth, ImpliedLambdaHat) {
  auto cfg = info_config(1, 200, 200.0, 0.05);
  cfg.activity = {{ConstantActivity{0.2}}, true};
  const auto g = growth_report(cfg);
  EXPECT_NEAR(g.implied_lambda_hat.mean, 0.05, 4.0 * g.implied_lambda_hat.standard_error);
  EXPECT_NEAR(g.savings.mean, 0.03, 1e-12);
  EXPECT_NEAR(g.mean_activity.mean, 0.2, 1e-12);
}

TEST(Growth, ZeroLambdaHatMvpExcessIsActivity) {
  auto cfg = info_config(2, 200, 200.0, 0.05);
  cfg.net_risk_adjusted_return = 0.0;
  const auto g = growth_report(cfg);
  EXPECT_NEAR(g.mvp.mean - g.savings.mean, g.mean_activity.mean, 4.0 * g.mvp.standard_error + 1e-3);
}

TEST(Growth, VanishingActivityGivesInterestRate) {
  auto cfg = info_config(2, 50, 500.0, 0.5);
  cfg.activity = {{ConstantActivity{1e-4}}, true};
  const auto g = growth_report(cfg);
  for (double x : {g.savings.mean, g.ap.mean, g.mvp.mean, g.atom_gop.mean, g.extended_gop.mean}) {
    EXPECT_NEAR(x, 0.03, 1e-3);
  }
}

TEST(Sampling, DecorrelatedSamples) {
  const std::vector<double> clock{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
  const std::vector<double> y{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
  EXPECT_EQ(decorrelated_samples(clock, y, 5.0), (std::vector<double>{0, 5, 10}));
  EXPECT_EQ(decorrelated_samples(clock, y, 5.0, 5.0), (std::vector<double>{5, 10}));
}

TEST(TheoremTests, StationaryLawSmall) {
  auto cfg = info_config(2, 50, 500.0, 5.0);
  cfg.activity = {{ConstantActivity{1.0}}, true};
  const auto t = stationary_law_test(cfg);
  EXPECT_FALSE(t.ks.rejects(0.01));
  EXPECT_NEAR(t.sample_mean, 0.5, 0.02);
  EXPECT_EQ(t.samples, 50u * 2u * 101u);
}

TEST(TheoremTests, AdditivitySmall) {
  const auto cfg = info_config(3, 2000, 1.0, 0.02);
  const auto ks = additivity_test(cfg, {0}, {1, 2});
  EXPECT_FALSE(ks.rejects(0.01));
  EXPECT_EQ(ks.n, 1000u);
}

TEST(TheoremTests, AdditivityErrors) {
  auto cfg = info_config(3, 2000, 1.0, 0.02);
  EXPECT_THROW(additivity_test(cfg, {0}, {0, 1}), std::invalid_argument);
  EXPECT_THROW(additivity_test(cfg, {0}, {3}), std::out_of_range);
  cfg.paths = 150;
  EXPECT_THROW(additivity_test(cfg, {0}, {1}), std::invalid_argument);
  cfg.paths = 2000;
  cfg.mode = Mode::general_stationary;
  cfg.risk_premium_factors = {0.2, 0.3, 0.5};
  cfg.initial_values = std::vector<double>{1.0, 1.0, 1.0};
  EXPECT_THROW(additivity_test(cfg, {0}, {1}), std::invalid_argument);
}

TEST(TheoremTests, ScalingSmall) {
  const auto cfg = info_config(1, 2000, 4.0, 0.01);
  for (double c : {0.5, 2.0}) EXPECT_FALSE(scaling_test(cfg, {0}, c, 0.5).rejects(0.01)) << c;
  EXPECT_THROW(scaling_test(cfg, {0}, 0.0, 0.5), std::invalid_argument);
  EXPECT_THROW(scaling_test(cfg, {0}, 2.0, 1e6), std::runtime_error);
}

TEST(TheoremTests, ApDimensionSmall) {
  auto cfg = info_config(3, 20, 500.0, 0.05);
  cfg.activity = {{ConstantActivity{1.0}}, true};
  const auto t = ap_dimension_test(cfg);
  EXPECT_FALSE(t.ks.rejects(0.01));
  EXPECT_NEAR(t.clock_average, 1.0, 0.05);
}
