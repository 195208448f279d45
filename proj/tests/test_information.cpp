#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "imm/information.hpp"
#include "imm/quadrature.hpp"
#include "imm/sde.hpp"
#include "imm/special.hpp"

using namespace imm;

namespace {

MarketConfig kl_config(std::size_t n, double a, double lambda_hat, std::size_t paths) {
  MarketConfig cfg;
  cfg.n = n;
  cfg.risk_premium_factors.assign(n, 1.0 / static_cast<double>(n));
  cfg.activity = {{ConstantActivity{a}}, true};
  cfg.interest_rate = ConstantRate{0.03};
  cfg.net_risk_adjusted_return = lambda_hat;
  cfg.horizon = 50.0 / a;
  cfg.grid_step = cfg.horizon / 1000.0;
  cfg.paths = paths;
  cfg.seed = 5;
  return cfg;
}

}  // namespace

TEST(Special, DigammaAgainstBoost) {
  for (double x : {1e-3, 0.1, 0.5, 0.9, 1.0, 2.5, 7.0, 9.99, 10.0, 33.0, 1e4}) {
    EXPECT_NEAR(digamma(x), boost::math::digamma(x), 1e-13 * std::max(1.0, std::abs(digamma(x)))) << x;
    EXPECT_NEAR(trigamma(x), boost::math::trigamma(x), 1e-12 * trigamma(x)) << x;
  }
}

TEST(Special, DigammaClosedForms) {
  EXPECT_NEAR(digamma(1.0), -kEulerGamma, 1e-15);
  EXPECT_NEAR(digamma(2.0), 1.0 - kEulerGamma, 1e-15);
  EXPECT_NEAR(digamma(0.5), -kEulerGamma - 2.0 * std::numbers::ln2, 1e-14);
  EXPECT_NEAR(trigamma(1.0), std::numbers::pi * std::numbers::pi / 6.0, 1e-14);
}

TEST(Special, GammaShapeFromLogRatio) {
  for (double shape : {0.05, 0.4, 1.0, 2.0, 17.0, 300.0}) {
    const double s = std::log(shape) - digamma(shape);
    EXPECT_NEAR(gamma_shape_from_log_ratio(s) / shape, 1.0, 1e-10) << shape;
  }
}

TEST(GammaLaw, StationaryParametersAndLogMean) {
  const auto g = GammaLaw::stationary(0.25);
  EXPECT_DOUBLE_EQ(g.shape, 0.5);
  EXPECT_DOUBLE_EQ(g.rate, 2.0);
  EXPECT_DOUBLE_EQ(g.mean(), 0.25);
  EXPECT_DOUBLE_EQ(g.degrees_of_freedom(), 1.0);
  // omega = 1/2: psi(1) - ln 2
  EXPECT_NEAR(log_mean(0.5), -kEulerGamma - std::numbers::ln2, 1e-15);
  EXPECT_NEAR(log_mean(1.0), 1.0 - kEulerGamma - std::numbers::ln2, 1e-15);
}

TEST(GammaLaw, DensityIntegratesToOne) {
  for (double w : {0.25, 0.5, 1.0, 2.0}) {
    const auto g = GammaLaw::stationary(w);
    const auto q = integrate_half_line([&](double y) { return g.pdf(y); }, 10.0 * g.mean());
    EXPECT_NEAR(q.value, 1.0, 1e-10) << w;
  }
}

TEST(SelfInformation, MatchesQuadrature) {
  for (double w : {0.25, 0.5, 1.0, 2.0}) {
    const auto g = GammaLaw::stationary(w);
    const auto q = integrate_half_line(
        [&](double y) {
          const double lp = g.log_pdf(y);
          return std::exp(lp) * lp;
        },
        10.0 * g.mean());
    EXPECT_NEAR(self_information(w), q.value, 1e-8) << w;
  }
  EXPECT_NEAR(self_information(0.5), std::numbers::ln2 - 1.0, 1e-15);
}

TEST(SelfInformation, TotalIsSum) {
  const std::vector<double> w{0.2, 0.3, 0.5};
  EXPECT_NEAR(total_self_information(w),
              self_information(0.2) + self_information(0.3) + self_information(0.5), 1e-14);
}

TEST(StationaryDensity, IdentityPhiGivesTheGammaLaw) {
  for (double w : {0.3, 0.5, 1.0}) {
    const StationaryDensity p(w, VolatilityFunction{{0.0, 1.0}});
    const auto g = GammaLaw::stationary(w);
    EXPECT_NEAR(p.total_mass(), 1.0, 1e-9);
    EXPECT_NEAR(p.mean(), w, 1e-9);
    EXPECT_NEAR(p.log_mean(), g.log_mean(), 1e-8);
    EXPECT_NEAR(p.self_information(), g.self_information(), 1e-8);
    for (double y : {0.01, 0.3, 1.0, 4.0}) EXPECT_NEAR(p.pdf(y) / g.pdf(y), 1.0, 1e-8);
  }
}

TEST(StationaryDensity, QuadraticPhi) {
  // p ~ y exp(-y^2) at omega = 1/2
  const StationaryDensity p(0.5, VolatilityFunction{{0.0, 0.0, 1.0}});
  EXPECT_NEAR(p.total_mass(), 1.0, 1e-9);
  EXPECT_NEAR(p.mean(), std::sqrt(std::numbers::pi) / 2.0, 1e-8);
  // zero stationary drift: E[omega Y / phi(Y)] = E[Y]
  EXPECT_NEAR(p.integrate([&](double y) { return 0.5 / y * p.pdf(y); }), p.mean(), 1e-8);
}

TEST(StationaryDensity, NonNormalizableCandidatesThrow) {
  EXPECT_THROW(StationaryDensity(0.5, VolatilityFunction{{1.0}}), std::domain_error);
  EXPECT_THROW(StationaryDensity(0.5, VolatilityFunction{{1.0, 1.0}}), std::domain_error);
  EXPECT_THROW(StationaryDensity(0.5, VolatilityFunction{{0.0}}), std::domain_error);
  EXPECT_THROW(StationaryDensity(-1.0, VolatilityFunction{{0.0, 1.0}}), std::domain_error);
}

TEST(PhiSelector, OnlyIdentityMatches) {
  const std::vector<VolatilityFunction> c{{{1.0}}, {{0.0, 1.0}}, {{0.0, 0.0, 1.0}}, {{1.0, 1.0}}};
  const auto s = phi_identity_selector(c);
  ASSERT_TRUE(s.selected.has_value());
  EXPECT_EQ(*s.selected, 1u);
  EXPECT_LT(s.distances[1], 1e-6);
  EXPECT_TRUE(std::isinf(s.distances[0]));
  EXPECT_GT(s.distances[2], 1e-3);
  EXPECT_TRUE(std::isinf(s.distances[3]));
}

TEST(PhiSelector, ShiftedIdentityHasNoMatch) {
  const auto s = phi_identity_selector({VolatilityFunction{{0.1, 1.0}}});
  EXPECT_FALSE(s.selected.has_value());
}

TEST(ExponentialTilt, GammaMinimizesSelfInformation) {
  const double w = 0.5;
  const double base = self_information(w);
  struct G {
    std::function<double(double)> f;
    bool superlinear;
  };
  const std::vector<G> gs{{[](double y) { return y * y; }, true},
                          {[](double y) { return std::sqrt(y); }, false},
                          {[](double y) { return std::log(y) * std::log(y); }, true}};
  for (const auto& g : gs) {
    for (double eps : {-0.05, 0.05}) {
      const auto t = matched_exponential_tilt(w, eps, g.f, g.superlinear);
      if (eps > 0.0 && g.superlinear) {
        EXPECT_FALSE(t.has_value());
        continue;
      }
      ASSERT_TRUE(t.has_value());
      EXPECT_GT(t->self_information, base);
    }
    const auto zero = matched_exponential_tilt(w, 0.0, g.f, g.superlinear);
    ASSERT_TRUE(zero.has_value());
    EXPECT_NEAR(zero->self_information, base, 1e-8);
  }
}

TEST(KlDivergence, ClosedFormExamples) {
  EXPECT_NEAR(kl_divergence_closed_form(0.05, 2.0, 0.2), 0.21025, 1e-12);
  EXPECT_NEAR(kl_divergence_closed_form(0.0, 2.0, 0.7), 0.7, 1e-15);
  EXPECT_EQ(omega_bar_exact(1), 2.0);
  EXPECT_TRUE(std::isinf(omega_bar_exact(3)));
  EXPECT_THROW(kl_divergence_closed_form(0.1, 2.0, 0.0), std::invalid_argument);
}

TEST(KlDivergence, MonteCarloMatchesClosedForm) {
  const auto cfg = kl_config(1, 0.2, 0.05, 2000);
  const auto mc = kl_divergence_monte_carlo(cfg);
  EXPECT_NEAR(mc.estimate / 0.21025, 1.0, 0.02);
  EXPECT_TRUE(mc.flag.empty());
}

TEST(KlDivergence, ManyAtomsFlaggedTruncated) {
  auto cfg = kl_config(3, 1.0, 0.05, 20);
  const auto set = simulate_market(cfg);
  const auto r = info_report(cfg, set.paths);
  EXPECT_FALSE(r.kl_closed_form.has_value());
  EXPECT_EQ(r.kl_monte_carlo.flag, "truncated");
  EXPECT_TRUE(r.kl_monte_carlo.heavy_tailed);
  EXPECT_FALSE(r.omega_bar.exact.has_value());
  EXPECT_TRUE(std::isfinite(r.omega_bar.median));
  EXPECT_EQ(r.self_information.size(), 3u);
}

TEST(InfoReport, SingleAtom) {
  auto cfg = kl_config(1, 0.2, 0.05, 10);
  const auto set = simulate_market(cfg);
  const auto r = info_report(cfg, set.paths);
  ASSERT_TRUE(r.kl_closed_form.has_value());
  EXPECT_NEAR(*r.kl_closed_form, 0.21025, 1e-12);
  EXPECT_NEAR(r.self_information[0], self_information(1.0), 1e-15);
  EXPECT_EQ(*r.omega_bar.exact, 2.0);
}

TEST(RadonNikodym, MatchesInverseBesselMean) {
  // lambda_hat = 0: the benchmarked savings account is the inverse of a
  // dimension-4 squared Bessel process in the B-free intrinsic time, so
  // E[Lambda_T | Y_0, tau_T] = 1 - exp(-Y_0 / (2 phi_T)), phi_T = (e^tau_T - 1)/4
  auto cfg = kl_config(1, 0.5, 0.0, 2000);
  cfg.horizon = 5.0;
  cfg.grid_step = 0.002;
  const auto v = map_paths(cfg, [&](const MarketPath& p, std::size_t) {
    const auto l = radon_nikodym_path(cfg, p);
    EXPECT_DOUBLE_EQ(l.front(), 1.0);
    const double phi = std::expm1(p.clock[0].back() - p.clock[0].front()) / 4.0;
    return std::pair{l.back(), -std::expm1(-p.normalized[0][0] / (2.0 * phi))};
  });
  double m = 0.0, o = 0.0, s2 = 0.0;
  for (const auto& [l, e] : v) {
    m += l;
    o += e;
  }
  m /= static_cast<double>(v.size());
  o /= static_cast<double>(v.size());
  for (const auto& [l, e] : v) s2 += (l - e - m + o) * (l - e - m + o);
  const double se = std::sqrt(s2 / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  EXPECT_NEAR(m, o, 3.0 * se + 0.005);
  // strict supermartingale
  EXPECT_LT(m, 0.5);
}
