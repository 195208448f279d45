#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>

#include "imm/clocks.hpp"
#include "imm/information.hpp"
#include "imm/market.hpp"
#include "imm/portfolios.hpp"
#include "imm/rng.hpp"
#include "imm/sde.hpp"

namespace imm {

// ---------------------------------------------------------------- KS tests

struct KsResult {
  double statistic = 0.0;  // D
  double p_value = 1.0;
  std::size_t n = 0;
  std::size_t m = 0;       // second sample size, 0 for one-sample tests
  std::string reference;

  bool rejects(double level = 0.01) const { return p_value < level; }
};

inline constexpr std::size_t kKsMinSamples = 100;

// Survival function of the Kolmogorov distribution, P(K > lambda).
inline double kolmogorov_survival(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  if (lambda < 1.18) {
    // Theta-function form, converges fast for small lambda.
    const double c = std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double s = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double j = 2.0 * k - 1.0;
      s += std::exp(-j * j * c);
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * s, 0.0, 1.0);
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 == 1 ? term : -term);
    if (term < 1e-300) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

// Asymptotic p-value with Stephens' small-sample correction.
inline double ks_p_value(double d, double effective_n) {
  const double sn = std::sqrt(effective_n);
  return kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d);
}

inline KsResult ks_one_sample(std::vector<double> samples, const std::function<double(double)>& cdf,
                              std::string reference = "") {
  if (samples.size() < kKsMinSamples) {
    throw std::invalid_argument("ks_one_sample: at least 100 samples required");
  }
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return {d, ks_p_value(d, n), samples.size(), 0, std::move(reference)};
}

inline KsResult ks_one_sample(std::vector<double> samples, const GammaLaw& law) {
  return ks_one_sample(std::move(samples), [&](double y) { return law.cdf(y); },
                       "Gamma(shape=" + std::to_string(law.shape) +
                           ", rate=" + std::to_string(law.rate) + ")");
}

inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b,
                              std::string reference = "two-sample") {
  if (a.size() < kKsMinSamples || b.size() < kKsMinSamples) {
    throw std::invalid_argument("ks_two_sample: at least 100 samples per side required");
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return {d, ks_p_value(d, na * nb / (na + nb)), a.size(), b.size(), std::move(reference)};
}

// ---------------------------------------------------------------- Student-t

struct StudentTFit {
  double df = 0.0;
  double location = 0.0;
  double scale = 0.0;
  double log_likelihood = 0.0;
  double df_se = 0.0;
  double location_se = 0.0;
  double scale_se = 0.0;
  double horizon = 0.0;       // return horizon the data refer to
  std::size_t observations = 0;
  bool converged = true;
  bool at_boundary = false;   // df hit the search bound (effectively normal)
};

namespace detail {

struct TFitState {
  double location;
  double scale;
  double loglik;
  bool converged;
};

inline double t_loglik(const std::vector<double>& x, double nu, double mu, double s) {
  const double n = static_cast<double>(x.size());
  const double c = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                   0.5 * std::log(nu * std::numbers::pi) - std::log(s);
  double acc = 0.0;
  for (double v : x) {
    const double z = (v - mu) / s;
    acc += std::log1p(z * z / nu);
  }
  return n * c - 0.5 * (nu + 1.0) * acc;
}

// EM iterations for location and scale at fixed df.
inline TFitState t_profile(const std::vector<double>& x, double nu, double mu0, double s0) {
  const double n = static_cast<double>(x.size());
  double mu = mu0;
  double s2 = s0 * s0;
  bool converged = false;
  for (int it = 0; it < 1000; ++it) {
    double sw = 0.0, swx = 0.0;
    for (double v : x) {
      const double d = v - mu;
      const double w = (nu + 1.0) / (nu + d * d / s2);
      sw += w;
      swx += w * v;
    }
    const double mu_new = swx / sw;
    double ss = 0.0;
    for (double v : x) {
      const double d = v - mu_new;
      const double w = (nu + 1.0) / (nu + d * d / s2);
      ss += w * d * d;
    }
    const double s2_new = ss / n;
    const bool done = std::abs(mu_new - mu) <= 1e-12 * std::sqrt(s2) &&
                      std::abs(s2_new - s2) <= 1e-11 * s2;
    mu = mu_new;
    s2 = s2_new;
    if (done) {
      converged = true;
      break;
    }
  }
  const double s = std::sqrt(s2);
  return {mu, s, t_loglik(x, nu, mu, s), converged};
}

}  // namespace detail

inline constexpr std::size_t kStudentTMinObservations = 10000;
inline constexpr double kStudentTMinDf = 0.5;
inline constexpr double kStudentTMaxDf = 500.0;

// Maximum likelihood location-scale Student-t fit. The likelihood is
// profiled over df on a log grid, refined by Brent's method in ln(df);
// standard errors come from the observed information in (df, loc, ln scale).
inline StudentTFit student_t_fit(const std::vector<double>& x, double horizon = 0.0) {
  if (x.size() < kStudentTMinObservations) {
    throw std::invalid_argument("student_t_fit: at least 10000 observations required");
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw std::invalid_argument("student_t_fit: non-finite observation");
  }
  StudentTFit fit;
  fit.horizon = horizon;
  fit.observations = x.size();

  std::vector<double> sorted = x;
  std::sort(sorted.begin(), sorted.end());
  const double med = detail::quantile_sorted(sorted, 0.5);
  const double iqr = detail::quantile_sorted(sorted, 0.75) - detail::quantile_sorted(sorted, 0.25);
  double mu = med;
  double s = iqr > 0.0 ? iqr / 1.349 : 1.0;
  if (!(s > 0.0)) throw std::invalid_argument("student_t_fit: degenerate data");

  const int grid = 40;
  const double lo = std::log(kStudentTMinDf), hi = std::log(kStudentTMaxDf);
  std::vector<double> lnnu(grid), ll(grid);
  int best = 0;
  for (int g = 0; g < grid; ++g) {
    lnnu[g] = lo + (hi - lo) * g / (grid - 1);
    const auto st = detail::t_profile(x, std::exp(lnnu[g]), mu, s);
    ll[g] = st.loglik;
    if (ll[g] > ll[best]) best = g;
  }
  const double a = lnnu[std::max(best - 1, 0)];
  const double b = lnnu[std::min(best + 1, grid - 1)];
  bool converged = true;
  auto neg = [&](double t) {
    const auto st = detail::t_profile(x, std::exp(t), mu, s);
    converged = converged && st.converged;
    return -st.loglik;
  };
  std::uintmax_t iters = 100;
  const auto res = boost::math::tools::brent_find_minima(neg, a, b, 30, iters);
  const double nu = std::exp(res.first);
  const auto st = detail::t_profile(x, nu, mu, s);
  fit.df = nu;
  fit.location = st.location;
  fit.scale = st.scale;
  fit.log_likelihood = st.loglik;
  fit.converged = converged && st.converged && iters < 100;
  fit.at_boundary = best == grid - 1 || best == 0 || res.first >= hi - 1e-6 ||
                    res.first <= lo + 1e-6;

  // Observed information by central differences in (nu, mu, ln s).
  const Eigen::Vector3d p0(nu, st.location, std::log(st.scale));
  const Eigen::Vector3d h(std::max(1e-4, 1e-3 * nu), 1e-3 * st.scale, 1e-3);
  auto f = [&](const Eigen::Vector3d& p) { return detail::t_loglik(x, p[0], p[1], std::exp(p[2])); };
  Eigen::Matrix3d hess;
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) {
      Eigen::Vector3d pp = p0, pm = p0, mp = p0, mm = p0;
      pp[i] += h[i]; pp[j] += h[j];
      pm[i] += h[i]; pm[j] -= h[j];
      mp[i] -= h[i]; mp[j] += h[j];
      mm[i] -= h[i]; mm[j] -= h[j];
      hess(i, j) = hess(j, i) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h[i] * h[j]);
    }
  }
  const Eigen::Matrix3d cov = (-hess).inverse();
  fit.df_se = cov(0, 0) > 0.0 ? std::sqrt(cov(0, 0)) : std::numeric_limits<double>::quiet_NaN();
  fit.location_se = cov(1, 1) > 0.0 ? std::sqrt(cov(1, 1)) : std::numeric_limits<double>::quiet_NaN();
  fit.scale_se = cov(2, 2) > 0.0 ? st.scale * std::sqrt(cov(2, 2))
                                 : std::numeric_limits<double>::quiet_NaN();
  return fit;
}

// ---------------------------------------------------------------- Growth

struct Mean {
  double mean = 0.0;
  double standard_error = 0.0;
};

inline Mean mean_and_se(const std::vector<double>& v) {
  Mean m;
  if (v.empty()) return m;
  const double n = static_cast<double>(v.size());
  m.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - m.mean) * (x - m.mean);
  m.standard_error = v.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  return m;
}

struct GrowthReport {
  Mean savings;         // A^0
  Mean ap;
  Mean mvp;
  Mean atom_gop;
  Mean extended_gop;
  Mean mean_activity;   // time average of a_t
  Mean implied_lambda_hat;
  double configured_lambda_hat = 0.0;
  std::size_t paths = 0;
};

// Per-path realized growth rates (ln S_T - ln S_0)/T of the standard
// portfolios, averaged over paths.
struct PathGrowth {
  double savings, ap, mvp, atom_gop, extended_gop, activity, implied_lambda_hat;
};

inline PathGrowth path_growth(const MarketConfig& cfg, const MarketPath& p) {
  const std::size_t last = p.points() - 1;
  const double horizon = static_cast<double>(last) * cfg.grid_step;
  auto rate = [&](const PortfolioPath& s) {
    return (s.log_value[last] - s.log_value[0]) / horizon;
  };
  PathGrowth g{};
  g.savings = (p.log_savings[last] - p.log_savings[0]) / horizon;
  g.ap = rate(portfolio_path(ApRule{}, cfg, p));
  g.mvp = rate(portfolio_path(MvpRule{}, cfg, p));
  g.atom_gop = rate(portfolio_path(AtomGopRule{}, cfg, p));
  g.extended_gop = rate(portfolio_path(ExtendedGopRule{}, cfg, p));
  double tau = 0.0;
  for (std::size_t i = 0; i < last; ++i) tau += 0.5 * (p.activity[i] + p.activity[i + 1]) * cfg.grid_step;
  g.activity = tau / horizon;
  g.implied_lambda_hat = (g.mvp - g.savings) / g.activity - 1.0;
  return g;
}

inline GrowthReport growth_report(const MarketConfig& cfg, const std::vector<PathGrowth>& per_path) {
  GrowthReport r;
  r.configured_lambda_hat = cfg.net_risk_adjusted_return;
  r.paths = per_path.size();
  auto col = [&](double PathGrowth::*m) {
    std::vector<double> v;
    v.reserve(per_path.size());
    for (const auto& g : per_path) v.push_back(g.*m);
    return mean_and_se(v);
  };
  r.savings = col(&PathGrowth::savings);
  r.ap = col(&PathGrowth::ap);
  r.mvp = col(&PathGrowth::mvp);
  r.atom_gop = col(&PathGrowth::atom_gop);
  r.extended_gop = col(&PathGrowth::extended_gop);
  r.mean_activity = col(&PathGrowth::activity);
  r.implied_lambda_hat = col(&PathGrowth::implied_lambda_hat);
  return r;
}

// Simulates cfg.paths paths and reports their growth rates.
inline GrowthReport growth_report(const MarketConfig& cfg, std::size_t workers = default_workers()) {
  return growth_report(cfg, map_paths(cfg, [&](const MarketPath& p, std::size_t) {
                         return path_growth(cfg, p);
                       }, workers));
}

// ---------------------------------------------------------------- Sampling

// Values at the first grid points where the clock has advanced by at least
// `interval` since the previous sample; the first sample is taken once the
// clock passes `burn_in`.
inline std::vector<double> decorrelated_samples(const std::vector<double>& clock,
                                                const std::vector<double>& values,
                                                double interval, double burn_in = 0.0) {
  std::vector<double> out;
  double next = clock.front() + burn_in;
  for (std::size_t i = 0; i < clock.size(); ++i) {
    if (clock[i] >= next) {
      out.push_back(values[i]);
      next = clock[i] + interval;
    }
  }
  return out;
}

inline constexpr double kDecorrelationInterval = 5.0;

// ---------------------------------------------------------------- Theorem tests

namespace detail {

inline void require_info_mode(const MarketConfig& cfg, const char* what) {
  require_valid(cfg);
  if (cfg.mode != Mode::info_minimizing) {
    throw std::invalid_argument(std::string(what) + ": requires an information-minimizing config");
  }
}

// Stream id offset for draws that must be independent of every path stream.
inline constexpr std::uint64_t kOracleStream = 0x5eed0000000000ULL;

}  // namespace detail

// Terminal Y^(A u B) from the first half of the paths against direct
// square-root draws of dimension d_A + d_B; the direct draws start from
// Y^(A u B)_0 and run over tau_T - tau_0 of the paths in the second half, so
// both samples share the law of (start, clock) and are independent.
inline KsResult additivity_test(const MarketConfig& cfg, const std::vector<std::size_t>& set_a,
                                const std::vector<std::size_t>& set_b,
                                std::size_t workers = default_workers()) {
  detail::require_info_mode(cfg, "additivity_test");
  detail::check_index_set(set_a, cfg.n);
  detail::check_index_set(set_b, cfg.n);
  std::vector<std::size_t> joint = set_a;
  joint.insert(joint.end(), set_b.begin(), set_b.end());
  for (std::size_t k : set_a) {
    if (std::find(set_b.begin(), set_b.end(), k) != set_b.end()) {
      throw std::invalid_argument("additivity_test: index sets must be disjoint");
    }
  }
  if (cfg.paths < 2 * kKsMinSamples) {
    throw std::invalid_argument("additivity_test: at least 200 paths required");
  }
  struct Row {
    double start, terminal, clock;
  };
  const auto rows = map_paths(
      cfg,
      [&](const MarketPath& p, std::size_t) {
        const AtomSum s = sum_of_atoms(cfg, p, joint);
        const auto& tau = p.clock[joint.front()];
        return Row{s.normalized.front(), s.normalized.back(), tau.back() - tau.front()};
      },
      workers);
  double mean = 0.0;
  for (std::size_t k : joint) mean += cfg.risk_premium_factors[k];
  const SquareRootSpec spec = SquareRootSpec::from_mean(mean);

  const std::size_t half = rows.size() / 2;
  std::vector<double> simulated, direct;
  for (std::size_t i = 0; i < half; ++i) simulated.push_back(rows[i].terminal);
  for (std::size_t i = half; i < 2 * half; ++i) {
    RngStream rng(cfg.seed, detail::kOracleStream + i);
    direct.push_back(sample_srou_exact(spec, rows[i].start, rows[i].clock, rng));
  }
  return ks_two_sample(std::move(simulated), std::move(direct),
                       "square-root process of dimension " + std::to_string(spec.dimension));
}

// Scaling of the B-denominated atom-set value: c^-1 Abar at intrinsic time
// c*u (first half of paths) against squared Bessel draws of dimension d_A
// started at c^-1 Abar_0 and run for u (second half). The intrinsic time is
// the B-free clock of Abar; grid overshoot is matched by using each path's
// realized elapsed time.
inline KsResult scaling_test(const MarketConfig& cfg, const std::vector<std::size_t>& atoms,
                             double c, double u, std::size_t workers = default_workers()) {
  detail::require_info_mode(cfg, "scaling_test");
  if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("scaling_test: c must be > 0");
  if (!(u > 0.0)) throw std::invalid_argument("scaling_test: u must be > 0");
  detail::check_index_set(atoms, cfg.n);
  if (cfg.paths < 2 * kKsMinSamples) {
    throw std::invalid_argument("scaling_test: at least 200 paths required");
  }
  struct Row {
    double start, value, elapsed;
  };
  const auto rows = map_paths(
      cfg,
      [&](const MarketPath& p, std::size_t) {
        const auto phi = intrinsic_time(cfg, p, AtomSetClock{atoms}, true);
        const auto it = std::lower_bound(phi.begin(), phi.end(), c * u);
        if (it == phi.end()) {
          throw std::runtime_error("scaling_test: horizon too short to reach the target intrinsic time");
        }
        const auto i = static_cast<std::size_t>(it - phi.begin());
        auto denominated = [&](std::size_t j) {
          double s = 0.0;
          for (std::size_t k : atoms) {
            s += p.normalized[k][j] * std::exp(p.clock[k][j] - p.clock[k][0]);
          }
          return s;
        };
        return Row{denominated(0), denominated(i), phi[i]};
      },
      workers);
  double dimension = 0.0;
  for (std::size_t k : atoms) dimension += 4.0 * cfg.risk_premium_factors[k];

  const std::size_t half = rows.size() / 2;
  std::vector<double> scaled, direct;
  for (std::size_t i = 0; i < half; ++i) scaled.push_back(rows[i].value / c);
  for (std::size_t i = half; i < 2 * half; ++i) {
    RngStream rng(cfg.seed, detail::kOracleStream + i);
    direct.push_back(sample_besq(dimension, rows[i].start / c, rows[i].elapsed / c, rng));
  }
  return ks_two_sample(std::move(scaled), std::move(direct),
                       "squared Bessel process of dimension " + std::to_string(dimension));
}

struct StationaryTest {
  KsResult ks;
  double sample_mean = 0.0;
  double clock_average = 0.0;  // integral of the process against its own clock / elapsed clock
  std::size_t samples = 0;
};

namespace detail {

inline StationaryTest finish_stationary(std::vector<std::vector<double>> samples,
                                        double weighted, double elapsed, const GammaLaw& law) {
  std::vector<double> all;
  for (auto& s : samples) all.insert(all.end(), s.begin(), s.end());
  if (all.size() < kKsMinSamples) {
    throw std::runtime_error("insufficient decorrelated samples for the stationary test");
  }
  StationaryTest out;
  out.samples = all.size();
  out.sample_mean = std::accumulate(all.begin(), all.end(), 0.0) / static_cast<double>(all.size());
  out.clock_average = weighted / elapsed;
  out.ks = ks_one_sample(std::move(all), law);
  return out;
}

struct ClockSamples {
  std::vector<double> samples;
  double weighted = 0.0;
  double elapsed = 0.0;
};

inline ClockSamples clock_samples(const std::vector<double>& clock, const std::vector<double>& y,
                                  double interval, double burn_in) {
  ClockSamples cs;
  cs.samples = decorrelated_samples(clock, y, interval, burn_in);
  for (std::size_t i = 0; i + 1 < clock.size(); ++i) {
    const double d = clock[i + 1] - clock[i];
    cs.weighted += 0.5 * (y[i] + y[i + 1]) * d;
    cs.elapsed += d;
  }
  return cs;
}

}  // namespace detail

// Long-run law of the normalized atoms, sampled every `interval` units of
// activity time and pooled over atoms and paths, against Gamma(2 omega, 2).
inline StationaryTest stationary_law_test(const MarketConfig& cfg,
                                          double interval = kDecorrelationInterval,
                                          std::size_t workers = default_workers()) {
  detail::require_info_mode(cfg, "stationary_law_test");
  const auto per_path = map_paths(
      cfg,
      [&](const MarketPath& p, std::size_t) {
        detail::ClockSamples all;
        for (std::size_t k = 0; k < p.atoms(); ++k) {
          auto cs = detail::clock_samples(p.clock[k], p.normalized[k], interval, 0.0);
          all.samples.insert(all.samples.end(), cs.samples.begin(), cs.samples.end());
          all.weighted += cs.weighted;
          all.elapsed += cs.elapsed;
        }
        return all;
      },
      workers);
  std::vector<std::vector<double>> samples;
  double weighted = 0.0, elapsed = 0.0;
  for (const auto& cs : per_path) {
    samples.push_back(cs.samples);
    weighted += cs.weighted;
    elapsed += cs.elapsed;
  }
  return detail::finish_stationary(std::move(samples), weighted, elapsed,
                                   GammaLaw::stationary(cfg.risk_premium_factors.front()));
}

// Normalized AP sum_k Y^k in the common activity clock against Gamma(2, 2).
inline StationaryTest ap_dimension_test(const MarketConfig& cfg,
                                        double interval = kDecorrelationInterval,
                                        std::size_t workers = default_workers()) {
  detail::require_info_mode(cfg, "ap_dimension_test");
  const auto per_path = map_paths(
      cfg,
      [&](const MarketPath& p, std::size_t) {
        std::vector<double> y(p.points(), 0.0);
        for (std::size_t k = 0; k < p.atoms(); ++k) {
          for (std::size_t i = 0; i < p.points(); ++i) y[i] += p.normalized[k][i];
        }
        return detail::clock_samples(p.clock[0], y, interval, 0.0);
      },
      workers);
  std::vector<std::vector<double>> samples;
  double weighted = 0.0, elapsed = 0.0;
  for (const auto& cs : per_path) {
    samples.push_back(cs.samples);
    weighted += cs.weighted;
    elapsed += cs.elapsed;
  }
  return detail::finish_stationary(std::move(samples), weighted, elapsed, GammaLaw{2.0, 2.0});
}

// Normalized atom GOP Y* in its own clock tau* against Gamma(2, 2). The
// first sample is taken after one decorrelation interval.
inline StationaryTest gop_dimension_test(const MarketConfig& cfg,
                                         double interval = kDecorrelationInterval,
                                         std::size_t workers = default_workers()) {
  detail::require_info_mode(cfg, "gop_dimension_test");
  const auto per_path = map_paths(
      cfg,
      [&](const MarketPath& p, std::size_t) {
        const AtomGopPath g = atom_gop_path(cfg, p);
        return detail::clock_samples(g.clock, g.normalized, interval, interval);
      },
      workers);
  std::vector<std::vector<double>> samples;
  double weighted = 0.0, elapsed = 0.0;
  for (const auto& cs : per_path) {
    samples.push_back(cs.samples);
    weighted += cs.weighted;
    elapsed += cs.elapsed;
  }
  return detail::finish_stationary(std::move(samples), weighted, elapsed, GammaLaw{2.0, 2.0});
}

}  // namespace imm
