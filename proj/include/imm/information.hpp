#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "imm/market.hpp"
#include "imm/portfolios.hpp"
#include "imm/quadrature.hpp"
#include "imm/sde.hpp"
#include "imm/special.hpp"

namespace imm {

// Gamma(shape, rate) law. The stationary law of a normalized atom with risk
// premium factor omega is Gamma(2 omega, 2).
struct GammaLaw {
  double shape = 1.0;
  double rate = 2.0;

  static GammaLaw stationary(double omega) {
    if (!(omega > 0.0) || !std::isfinite(omega)) {
      throw std::domain_error("GammaLaw: omega must be finite and > 0");
    }
    return {2.0 * omega, 2.0};
  }

  double log_pdf(double y) const {
    if (!(y > 0.0)) return -std::numeric_limits<double>::infinity();
    return shape * std::log(rate) + (shape - 1.0) * std::log(y) - rate * y - std::lgamma(shape);
  }
  double pdf(double y) const { return y > 0.0 ? std::exp(log_pdf(y)) : 0.0; }
  double cdf(double y) const { return y > 0.0 ? boost::math::gamma_p(shape, rate * y) : 0.0; }

  double mean() const { return shape / rate; }
  double variance() const { return shape / (rate * rate); }
  double log_mean() const { return digamma(shape) - std::log(rate); }
  // Squared-Bessel dimension 4 omega; meaningful for rate 2.
  double degrees_of_freedom() const { return 2.0 * shape; }
  // Integral of p ln p (negative differential entropy).
  double self_information() const {
    return (shape - 1.0) * digamma(shape) - shape - std::lgamma(shape) + std::log(rate);
  }

  template <class Urbg>
  double sample(Urbg& rng) const {
    return std::gamma_distribution<double>(shape, 1.0 / rate)(rng);
  }
};

// E[ln Y] under Gamma(2 omega, 2).
inline double log_mean(double omega) { return GammaLaw::stationary(omega).log_mean(); }

inline double self_information(double omega) {
  const double a = 2.0 * omega;
  if (!(omega > 0.0) || !std::isfinite(omega)) {
    throw std::domain_error("self_information: omega must be finite and > 0");
  }
  return (a - 1.0) * (digamma(a) - std::numbers::ln2) - a - std::lgamma(a) +
         a * std::numbers::ln2;
}

inline double total_self_information(const std::vector<double>& omega) {
  double s = 0.0;
  for (double w : omega) s += self_information(w);
  return s;
}

// Stationary density of dY = Y (omega/phi(Y) - 1) dtau + Y phi(Y)^(-1/2) dW
// for a polynomial phi with nonnegative coefficients, normalized by
// quadrature:
//   p(y) = C phi(y) / y^2 exp(2 int_1^y (omega - phi(u)) / u du).
class StationaryDensity {
 public:
  StationaryDensity(double omega, VolatilityFunction phi)
      : omega_(omega), phi_(std::move(phi)) {
    if (!(omega > 0.0) || !std::isfinite(omega)) {
      throw std::domain_error("stationary_density: omega must be finite and > 0");
    }
    const auto& c = phi_.coefficients;
    bool any = false;
    for (double x : c) {
      if (!(std::isfinite(x) && x >= 0.0)) {
        throw std::domain_error("stationary_density: coefficients must be finite and >= 0");
      }
      any = any || x > 0.0;
    }
    if (!any) throw std::domain_error("stationary_density: phi vanishes identically");
    check_normalizable();

    split_ = 10.0 * omega_;
    normalize();
    // Second pass with the split at ten times the actual mean.
    const double m = mean();
    if (std::isfinite(m) && m > 0.0) {
      split_ = 10.0 * m;
      normalize();
    }
  }

  double log_pdf(double y) const {
    if (!(y > 0.0)) return -std::numeric_limits<double>::infinity();
    return log_unnormalized(y) - log_norm_;
  }
  double pdf(double y) const { return y > 0.0 ? std::exp(log_pdf(y)) : 0.0; }

  double integrate(const std::function<double(double)>& f) const {
    return integrate_half_line(f, split_).value;
  }

  double total_mass() const {
    return integrate([&](double y) { return pdf(y); });
  }
  double mean() const {
    return integrate([&](double y) { return y * pdf(y); });
  }
  double log_mean() const {
    return integrate([&](double y) {
      const double p = pdf(y);
      return p > 0.0 ? std::log(y) * p : 0.0;
    });
  }
  double self_information() const {
    return integrate([&](double y) {
      const double lp = log_pdf(y);
      return std::isfinite(lp) ? lp * std::exp(lp) : 0.0;
    });
  }

  double omega() const { return omega_; }
  const VolatilityFunction& phi() const { return phi_; }
  double split() const { return split_; }

 private:
  double log_unnormalized(double y) const {
    const auto& c = phi_.coefficients;
    const double ly = std::log(y);
    double acc = 2.0 * (omega_ - c[0]) * ly;
    double yj = 1.0;
    for (std::size_t j = 1; j < c.size(); ++j) {
      yj *= y;
      if (c[j] != 0.0) acc -= 2.0 * c[j] * (yj - 1.0) / static_cast<double>(j);
    }
    return std::log(phi_(y)) - 2.0 * ly + acc - shift_;
  }

  void check_normalizable() const {
    const auto& c = phi_.coefficients;
    std::size_t lowest = 0;
    while (c[lowest] == 0.0) ++lowest;
    std::size_t highest = c.size() - 1;
    while (c[highest] == 0.0) --highest;
    if (highest == 0) {
      throw std::domain_error("stationary_density: constant phi gives a non-normalizable density");
    }
    const bool ok_at_zero = lowest == 0 ? (omega_ - c[0] > 0.5)
                                        : (static_cast<double>(lowest) + 2.0 * omega_ > 1.0);
    if (!ok_at_zero) {
      throw std::domain_error("stationary_density: density is not integrable at zero");
    }
  }

  void normalize() {
    // Shift by the log density at a reference point so the quadrature works on
    // O(1) values.
    shift_ = 0.0;
    log_norm_ = 0.0;
    double best = -std::numeric_limits<double>::infinity();
    for (double y = 1e-3 * split_; y <= split_; y *= 1.2) best = std::max(best, log_unnormalized(y));
    shift_ = best;
    const double mass = integrate_half_line(
                            [&](double y) { return std::exp(log_unnormalized(y)); }, split_)
                            .value;
    if (!(mass > 0.0) || !std::isfinite(mass)) {
      throw std::domain_error("stationary_density: normalization failed");
    }
    log_norm_ = std::log(mass);
  }

  double omega_;
  VolatilityFunction phi_;
  double split_ = 1.0;
  double shift_ = 0.0;
  double log_norm_ = 0.0;
};

inline StationaryDensity stationary_density(double omega, const VolatilityFunction& phi) {
  return StationaryDensity(omega, phi);
}

// Gamma law with the same mean and log-mean as the density.
inline GammaLaw matched_gamma(double mean, double log_mean) {
  const double s = std::log(mean) - log_mean;
  const double shape = gamma_shape_from_log_ratio(s);
  return {shape, shape / mean};
}

inline double l1_distance(const StationaryDensity& p, const GammaLaw& q) {
  return p.integrate([&](double y) { return std::abs(p.pdf(y) - q.pdf(y)); });
}

struct PhiSelection {
  std::optional<std::size_t> selected;
  std::vector<double> distances;     // +inf for non-normalizable candidates
  std::vector<std::string> notes;
};

// Distance of each candidate's stationary density to its moment-matched
// gamma law; picks the closest candidate under the tolerance.
inline PhiSelection phi_identity_selector(const std::vector<VolatilityFunction>& candidates,
                                          double omega = 0.5, double tol = 1e-6) {
  PhiSelection out;
  for (const auto& phi : candidates) {
    try {
      const StationaryDensity p(omega, phi);
      const GammaLaw g = matched_gamma(p.mean(), p.log_mean());
      out.distances.push_back(l1_distance(p, g));
      out.notes.emplace_back("");
    } catch (const std::domain_error& e) {
      out.distances.push_back(std::numeric_limits<double>::infinity());
      out.notes.emplace_back(e.what());
    }
  }
  double best = tol;
  for (std::size_t i = 0; i < out.distances.size(); ++i) {
    if (out.distances[i] < best) {
      best = out.distances[i];
      out.selected = i;
    }
  }
  return out;
}

// Exponential tilt q(y) ~ y^(s-1) exp(-b y + eps g(y)) of the stationary
// gamma law, with (s, b) re-solved so that q keeps the mean and log-mean of
// Gamma(2 omega, 2).
struct TiltedDensity {
  double shape = 0.0;
  double rate = 0.0;
  double log_norm = 0.0;
  double self_information = 0.0;
  int iterations = 0;
};

namespace detail {

struct TiltMoments {
  double log_z;
  double m_y, m_ly;              // E[y], E[ln y]
  double v_yy, v_yl, v_ll;       // covariances
};

inline TiltMoments tilt_moments(double shape, double rate, double eps,
                                const std::function<double(double)>& g, double split,
                                double shift) {
  auto logq = [&](double y) {
    return (shape - 1.0) * std::log(y) - rate * y + eps * g(y) - shift;
  };
  auto integral = [&](auto&& h) {
    return integrate_half_line(
               [&](double y) {
                 const double lq = logq(y);
                 return std::isfinite(lq) ? h(y) * std::exp(lq) : 0.0;
               },
               split)
        .value;
  };
  const double z = integral([](double) { return 1.0; });
  const double ey = integral([](double y) { return y; }) / z;
  const double el = integral([](double y) { return std::log(y); }) / z;
  const double eyy = integral([](double y) { return y * y; }) / z;
  const double eyl = integral([](double y) { return y * std::log(y); }) / z;
  const double ell = integral([](double y) { return std::log(y) * std::log(y); }) / z;
  return {std::log(z) + shift, ey, el, eyy - ey * ey, eyl - ey * el, ell - el * el};
}

}  // namespace detail

// Returns nullopt when the tilt is not integrable (eps > 0 with a g that
// grows faster than linearly at infinity or faster than |ln y| at zero).
inline std::optional<TiltedDensity> matched_exponential_tilt(
    double omega, double eps, const std::function<double(double)>& g, bool grows_superlinearly) {
  if (eps > 0.0 && grows_superlinearly) return std::nullopt;
  const GammaLaw base = GammaLaw::stationary(omega);
  const double target_y = base.mean();
  const double target_ly = base.log_mean();
  const double split = 10.0 * target_y;

  // Newton on the convex dual: natural parameters (shape - 1, -rate).
  double shape = base.shape;
  double rate = base.rate;
  const double shift = (base.shape - 1.0) * std::log(target_y) - base.rate * target_y;
  TiltedDensity out;
  for (int it = 0; it < 50; ++it) {
    const auto m = detail::tilt_moments(shape, rate, eps, g, split, shift);
    const double r1 = m.m_y - target_y;
    const double r2 = m.m_ly - target_ly;
    out.iterations = it + 1;
    if (std::abs(r1) < 1e-10 && std::abs(r2) < 1e-10) break;
    // d E[y]/d shape = Cov(y, ln y), d E[y]/d rate = -Var(y), etc.
    const double j11 = m.v_yl, j12 = -m.v_yy;
    const double j21 = m.v_ll, j22 = -m.v_yl;
    const double det = j11 * j22 - j12 * j21;
    double ds = -(j22 * r1 - j12 * r2) / det;
    double db = -(-j21 * r1 + j11 * r2) / det;
    double step = 1.0;
    while (shape + step * ds <= 0.0 || rate + step * db <= 0.0) step *= 0.5;
    shape += step * ds;
    rate += step * db;
  }
  const auto m = detail::tilt_moments(shape, rate, eps, g, split, shift);
  out.shape = shape;
  out.rate = rate;
  out.log_norm = m.log_z;
  // int q ln q = E_q[(s-1) ln y - b y + eps g] - ln Z
  const double eg = [&] {
    auto logq = [&](double y) {
      return (shape - 1.0) * std::log(y) - rate * y + eps * g(y) - m.log_z;
    };
    return integrate_half_line(
               [&](double y) {
                 const double lq = logq(y);
                 return std::isfinite(lq) ? g(y) * std::exp(lq) : 0.0;
               },
               split)
        .value;
  }();
  out.self_information =
      (shape - 1.0) * m.m_ly - rate * m.m_y + eps * eg - m.log_z;
  return out;
}

// Kullback-Leibler divergence of the information-minimizing market:
// E[a] (lambda_hat^2 + omega_bar + 2 lambda_hat) / 2.
inline double kl_divergence_closed_form(double lambda_hat, double omega_bar, double mean_activity) {
  if (!(mean_activity > 0.0)) {
    throw std::invalid_argument("kl_divergence_closed_form: mean activity must be > 0");
  }
  return 0.5 * mean_activity * (lambda_hat * lambda_hat + omega_bar + 2.0 * lambda_hat);
}

// omega_bar(n) = E[sum_k omega_k^2 / Y^k] under the stationary law. Finite
// only for n = 1 (E[1/Y] = rate/(shape - 1) = 2); infinite for shape <= 1.
inline double omega_bar_exact(std::size_t n) {
  if (n == 1) return 2.0;
  return std::numeric_limits<double>::infinity();
}

// Stationary mean of the shared activity process.
inline double stationary_mean_activity(const MarketConfig& cfg) {
  const auto& spec = cfg.activity.spec_for(0);
  if (const auto* c = std::get_if<ConstantActivity>(&spec)) return c->a0;
  return std::get<CirActivity>(spec).level;
}

// Market price of risk theta^k = (lambda* - r)/beta^k + omega^k beta^k.
inline double squared_market_price_of_risk(const MarketConfig& cfg, const MarketPath& p,
                                           std::size_t i) {
  const double spread = p.risk_adjusted_return[i] - p.rate[i];
  double s = 0.0;
  for (std::size_t k = 0; k < p.atoms(); ++k) {
    const double b = p.volatility[k][i];
    const double th = spread / b + cfg.risk_premium_factors[k] * b;
    s += th * th;
  }
  return s;
}

struct KlEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  std::size_t samples = 0;
  bool heavy_tailed = false;  // n >= 2: the untruncated mean does not exist
  double truncation_quantile = 1.0;
  std::string flag;           // "", or "truncated"
};

namespace detail {

inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

// Mean of the values at or below the q-quantile.
inline double truncated_mean(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double cut = quantile_sorted(v, q);
  double s = 0.0;
  std::size_t m = 0;
  for (double x : v) {
    if (x > cut) break;
    s += x;
    ++m;
  }
  return m ? s / static_cast<double>(m) : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace detail

namespace detail {

struct KlPathValues {
  double mean = 0.0;
  std::size_t count = 0;
  std::vector<double> values;  // kept only when the tail is heavy
};

inline KlPathValues kl_path_values(const MarketConfig& cfg, const MarketPath& p, bool keep) {
  KlPathValues out;
  const std::size_t m = p.points() > 1 ? p.points() - 1 : 1;
  double s = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double v = 0.5 * squared_market_price_of_risk(cfg, p, i);
    s += v;
    if (keep) out.values.push_back(v);
  }
  out.mean = s / static_cast<double>(m);
  out.count = m;
  return out;
}

inline KlEstimate combine_kl(const MarketConfig& cfg, std::vector<KlPathValues> per_path,
                             double truncation_quantile) {
  KlEstimate out;
  out.heavy_tailed = cfg.n >= 2;
  const double pm = static_cast<double>(per_path.size());
  double mean = 0.0;
  for (const auto& v : per_path) {
    mean += v.mean;
    out.samples += v.count;
  }
  mean /= pm;
  double var = 0.0;
  for (const auto& v : per_path) var += (v.mean - mean) * (v.mean - mean);
  out.standard_error = per_path.size() > 1 ? std::sqrt(var / (pm - 1.0) / pm) : 0.0;
  if (out.heavy_tailed) {
    std::vector<double> all;
    for (auto& v : per_path) all.insert(all.end(), v.values.begin(), v.values.end());
    out.truncation_quantile = truncation_quantile;
    out.estimate = truncated_mean(std::move(all), truncation_quantile);
    out.flag = "truncated";
  } else {
    out.estimate = mean;
  }
  return out;
}

}  // namespace detail

// Monte Carlo estimate of E[sum_k theta_k^2] / 2 by averaging over grid
// points (left end of each step) and paths. The standard error treats path
// means as independent. For n >= 2 the expectation is infinite; the
// 99%-truncated mean is reported and flagged.
template <class PathRange>
KlEstimate kl_divergence_monte_carlo(const MarketConfig& cfg, const PathRange& paths,
                                     double truncation_quantile = 0.99) {
  std::vector<detail::KlPathValues> per_path;
  for (const MarketPath& p : paths) per_path.push_back(detail::kl_path_values(cfg, p, cfg.n >= 2));
  return detail::combine_kl(cfg, std::move(per_path), truncation_quantile);
}

// Streaming variant: simulates cfg.paths paths without storing them.
inline KlEstimate kl_divergence_monte_carlo(const MarketConfig& cfg,
                                            double truncation_quantile = 0.99,
                                            std::size_t workers = default_workers()) {
  auto per_path = map_paths(
      cfg, [&](const MarketPath& p, std::size_t) { return detail::kl_path_values(cfg, p, cfg.n >= 2); },
      workers);
  return detail::combine_kl(cfg, std::move(per_path), truncation_quantile);
}

// Lambda_t = (A^0_t / S**_t) / (A^0_0 / S**_0) along one path.
inline std::vector<double> radon_nikodym_path(const MarketConfig& cfg, const MarketPath& p) {
  const PortfolioPath ext = portfolio_path(ExtendedGopRule{}, cfg, p);
  std::vector<double> out(p.points());
  for (std::size_t i = 0; i < p.points(); ++i) {
    out[i] = std::exp((p.log_savings[i] - p.log_savings[0]) -
                      (ext.log_value[i] - ext.log_value[0]));
  }
  return out;
}

struct OmegaBarEstimate {
  std::optional<double> exact;   // n = 1 only
  double median = 0.0;           // median of Z_t
  double truncated_mean = 0.0;   // mean of Z_t below the truncation quantile
  double truncation_quantile = 0.99;
};

struct InfoReport {
  std::vector<double> self_information;  // per atom
  double total_self_information = 0.0;
  std::vector<double> log_means;         // zeta^k
  double mean_activity = 0.0;
  double lambda_hat = 0.0;
  std::optional<double> kl_closed_form;  // n = 1 only
  KlEstimate kl_monte_carlo;
  OmegaBarEstimate omega_bar;
};

// Information quantities of a configuration; the Monte Carlo parts use the
// supplied paths.
template <class PathRange>
InfoReport info_report(const MarketConfig& cfg, const PathRange& paths) {
  InfoReport r;
  for (double w : cfg.risk_premium_factors) {
    r.self_information.push_back(self_information(w));
    r.log_means.push_back(log_mean(w));
  }
  r.total_self_information = total_self_information(cfg.risk_premium_factors);
  r.mean_activity = stationary_mean_activity(cfg);
  r.lambda_hat = cfg.net_risk_adjusted_return;
  if (cfg.n == 1) {
    r.kl_closed_form = kl_divergence_closed_form(r.lambda_hat, omega_bar_exact(1), r.mean_activity);
    r.omega_bar.exact = omega_bar_exact(1);
  }
  r.kl_monte_carlo = kl_divergence_monte_carlo(cfg, paths);

  std::vector<double> z;
  for (const MarketPath& p : paths) {
    for (std::size_t i = 0; i + 1 < p.points(); ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < p.atoms(); ++k) {
        const double w = cfg.risk_premium_factors[k];
        s += w * w / std::max(p.normalized[k][i], kVolatilityFloor);
      }
      z.push_back(s);
    }
  }
  if (!z.empty()) {
    r.omega_bar.truncated_mean = detail::truncated_mean(z, r.omega_bar.truncation_quantile);
    std::sort(z.begin(), z.end());
    r.omega_bar.median = detail::quantile_sorted(z, 0.5);
  }
  return r;
}

}  // namespace imm
