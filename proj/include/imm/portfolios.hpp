#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "imm/market.hpp"

namespace imm {

// Weights over primary security accounts. When includes_savings is set,
// weights[0] is the savings account and weights[1..n] the atoms.
struct PortfolioWeights {
  std::vector<double> weights;
  bool includes_savings = false;

  std::span<const double> atoms() const {
    return includes_savings ? std::span<const double>(weights).subspan(1)
                            : std::span<const double>(weights);
  }
  double savings() const { return includes_savings ? weights.front() : 0.0; }
  double sum() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }
};

inline PortfolioWeights make_weights(std::vector<double> w, bool includes_savings) {
  double total = 0.0;
  double gross = 0.0;
  for (double x : w) {
    if (!std::isfinite(x)) throw std::invalid_argument("portfolio weight is not finite");
    total += x;
    gross += std::abs(x);
  }
  if (std::abs(total - 1.0) > kSumTolerance * std::max(1.0, gross)) {
    throw std::invalid_argument("portfolio weights must sum to 1");
  }
  return {std::move(w), includes_savings};
}

inline PortfolioWeights atom_gop_weights(const MarketConfig& cfg) {
  require_valid(cfg);
  return make_weights(cfg.risk_premium_factors, false);
}

namespace detail {

inline void require_positive_volatility(std::span<const double> beta) {
  if (beta.empty()) throw std::invalid_argument("volatility vector is empty");
  for (double b : beta) {
    if (!(b > 0.0) || !std::isfinite(b)) {
      throw std::invalid_argument("atom volatilities must be finite and > 0");
    }
  }
}

}  // namespace detail

// Extended market GOP: atoms get (lambda* - r)/beta_k^2 + omega_k, the
// savings account gets (r - lambda*) sum_k beta_k^-2.
inline PortfolioWeights extended_gop_weights(double lambda_star, double r,
                                             std::span<const double> beta,
                                             std::span<const double> omega) {
  detail::require_positive_volatility(beta);
  if (omega.size() != beta.size()) {
    throw std::invalid_argument("extended_gop_weights: omega and beta differ in size");
  }
  const double spread = lambda_star - r;
  std::vector<double> w(beta.size() + 1);
  double inv_sq_sum = 0.0;
  for (std::size_t k = 0; k < beta.size(); ++k) {
    const double inv_sq = 1.0 / (beta[k] * beta[k]);
    inv_sq_sum += inv_sq;
    w[k + 1] = spread * inv_sq + omega[k];
  }
  w[0] = -spread * inv_sq_sum;
  return make_weights(std::move(w), true);
}

// Minimum variance portfolio of atoms: weights proportional to beta_k^-2.
inline PortfolioWeights mvp_weights(std::span<const double> beta) {
  detail::require_positive_volatility(beta);
  std::vector<double> w(beta.size());
  double total = 0.0;
  for (std::size_t k = 0; k < beta.size(); ++k) {
    w[k] = 1.0 / (beta[k] * beta[k]);
    total += w[k];
  }
  for (double& x : w) x /= total;
  return make_weights(std::move(w), false);
}

// Same weights from the precisions beta_k^-2 = phi(Y^k)/a^k, which stay
// finite at Y^k = 0 where beta itself needs the clamp.
inline PortfolioWeights mvp_weights_from_precision(std::span<const double> precision) {
  double total = 0.0;
  for (double x : precision) {
    if (!(std::isfinite(x) && x >= 0.0)) {
      throw std::invalid_argument("mvp_weights_from_precision: precisions must be finite and >= 0");
    }
    total += x;
  }
  if (!(total > 0.0)) throw std::invalid_argument("mvp_weights_from_precision: all precisions vanish");
  std::vector<double> w(precision.begin(), precision.end());
  for (double& x : w) x /= total;
  return make_weights(std::move(w), false);
}

inline double squared_volatility(std::span<const double> atom_weights,
                                  std::span<const double> beta) {
  double s = 0.0;
  for (std::size_t k = 0; k < beta.size(); ++k) {
    const double v = atom_weights[k] * beta[k];
    s += v * v;
  }
  return s;
}

// Portfolio construction rules.
struct AtomGopRule {};
struct ExtendedGopRule {};
struct MvpRule {};
struct ApRule {};
struct AtomSumRule {
  std::vector<std::size_t> atoms;  // 0-based
};
struct StaticRule {
  PortfolioWeights weights;
};

using WeightsRule =
    std::variant<AtomGopRule, ExtendedGopRule, MvpRule, ApRule, AtomSumRule, StaticRule>;

struct PortfolioPath {
  std::vector<double> log_value;           // ln S_t
  std::vector<double> squared_volatility;  // (sigma_t)^2 from the weights held at t
  std::vector<double> log_increment;       // ln S_{t+1} - ln S_t
  std::size_t nonpositive_steps = 0;       // rebalancing steps floored to stay positive

  double value(std::size_t i) const { return std::exp(log_value[i]); }
  std::size_t points() const { return log_value.size(); }
};

namespace detail {

inline double log_sum_exp(std::span<const double> x) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : x) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

// Log gross return of atom k over [t_i, t_{i+1}], with the starting normalized
// value clamped at the volatility floor.
inline double atom_log_return(const MarketPath& p, std::size_t k, std::size_t i) {
  const double y0 = p.normalized[k][i];
  if (y0 >= kVolatilityFloor) return p.log_value[k][i + 1] - p.log_value[k][i];
  return std::log(p.normalized[k][i + 1]) - std::log(kVolatilityFloor) +
         (p.log_basis[i + 1] - p.log_basis[i]) + (p.clock[k][i + 1] - p.clock[k][i]);
}

inline std::vector<double> volatilities_at(const MarketPath& p, std::size_t i) {
  std::vector<double> beta(p.atoms());
  for (std::size_t k = 0; k < p.atoms(); ++k) beta[k] = p.volatility[k][i];
  return beta;
}

inline std::vector<double> precisions_at(const MarketConfig& cfg, const MarketPath& p, std::size_t i) {
  std::vector<double> out(p.atoms());
  for (std::size_t k = 0; k < p.atoms(); ++k) {
    out[k] = cfg.volatility_function(std::max(p.normalized[k][i], 0.0)) / p.activity_of(k, i);
  }
  return out;
}

inline void check_index_set(std::span<const std::size_t> atoms, std::size_t n) {
  if (atoms.empty()) throw std::invalid_argument("index set must not be empty");
  std::vector<bool> seen(n, false);
  for (std::size_t k : atoms) {
    if (k >= n) throw std::out_of_range("index set references a missing atom");
    if (seen[k]) throw std::invalid_argument("index set contains duplicates");
    seen[k] = true;
  }
}

inline PortfolioPath buy_and_hold(const MarketPath& p, std::span<const std::size_t> atoms) {
  const std::size_t points = p.points();
  PortfolioPath out;
  out.log_value.resize(points);
  out.squared_volatility.resize(points);
  out.log_increment.resize(points > 0 ? points - 1 : 0);
  std::vector<double> logs(atoms.size());
  for (std::size_t i = 0; i < points; ++i) {
    for (std::size_t j = 0; j < atoms.size(); ++j) logs[j] = p.log_value[atoms[j]][i];
    const double total = log_sum_exp(logs);
    out.log_value[i] = total;
    double s2 = 0.0;
    for (std::size_t j = 0; j < atoms.size(); ++j) {
      const double w = std::exp(logs[j] - total);
      const double v = w * p.volatility[atoms[j]][i];
      s2 += v * v;
    }
    out.squared_volatility[i] = s2;
    if (i > 0) out.log_increment[i - 1] = out.log_value[i] - out.log_value[i - 1];
  }
  return out;
}

}  // namespace detail

// AP weights A^k / sum_l A^l at grid point i.
inline std::vector<double> ap_weights(const MarketPath& p, std::size_t i) {
  std::vector<double> logs(p.atoms());
  for (std::size_t k = 0; k < p.atoms(); ++k) logs[k] = p.log_value[k][i];
  const double total = detail::log_sum_exp(logs);
  for (double& x : logs) x = std::exp(x - total);
  return logs;
}

// Weights held at grid point i under the given rule.
inline PortfolioWeights weights_at(const WeightsRule& rule, const MarketConfig& cfg,
                                   const MarketPath& p, std::size_t i) {
  return std::visit(
      [&](const auto& r) -> PortfolioWeights {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, AtomGopRule>) {
          return PortfolioWeights{cfg.risk_premium_factors, false};
        } else if constexpr (std::is_same_v<T, ExtendedGopRule>) {
          const auto beta = detail::volatilities_at(p, i);
          return extended_gop_weights(p.risk_adjusted_return[i], p.rate[i], beta,
                                      cfg.risk_premium_factors);
        } else if constexpr (std::is_same_v<T, MvpRule>) {
          return mvp_weights_from_precision(detail::precisions_at(cfg, p, i));
        } else if constexpr (std::is_same_v<T, ApRule>) {
          return PortfolioWeights{ap_weights(p, i), false};
        } else if constexpr (std::is_same_v<T, AtomSumRule>) {
          detail::check_index_set(r.atoms, p.atoms());
          std::vector<double> logs;
          for (std::size_t k : r.atoms) logs.push_back(p.log_value[k][i]);
          const double total = detail::log_sum_exp(logs);
          std::vector<double> w(p.atoms(), 0.0);
          for (std::size_t j = 0; j < r.atoms.size(); ++j) {
            w[r.atoms[j]] = std::exp(logs[j] - total);
          }
          return PortfolioWeights{std::move(w), false};
        } else {
          return r.weights;
        }
      },
      rule);
}

// Value path of a portfolio along a simulated market path. Buy-and-hold rules
// (AP, atom sums) are exact sums of atoms; the others are self-financing
// portfolios rebalanced at every grid point. Every portfolio starts at
// S_0 = sum_k A^k_0.
inline PortfolioPath portfolio_path(const WeightsRule& rule, const MarketConfig& cfg,
                                    const MarketPath& p) {
  const std::size_t n = p.atoms();
  if (std::holds_alternative<ApRule>(rule)) {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return detail::buy_and_hold(p, all);
  }
  if (const auto* s = std::get_if<AtomSumRule>(&rule)) {
    detail::check_index_set(s->atoms, n);
    return detail::buy_and_hold(p, s->atoms);
  }
  if (const auto* s = std::get_if<StaticRule>(&rule)) {
    if (s->weights.atoms().size() != n) {
      throw std::out_of_range("static weights reference missing atoms");
    }
  }

  const std::size_t points = p.points();
  PortfolioPath out;
  out.log_value.resize(points);
  out.squared_volatility.resize(points);
  out.log_increment.resize(points > 0 ? points - 1 : 0);
  {
    std::vector<double> logs(n);
    for (std::size_t k = 0; k < n; ++k) logs[k] = p.log_value[k][0];
    out.log_value[0] = detail::log_sum_exp(logs);
  }

  std::vector<double> log_ret(n + 1);
  for (std::size_t i = 0; i < points; ++i) {
    const PortfolioWeights w = weights_at(rule, cfg, p, i);
    const auto atom_w = w.atoms();
    const auto beta = detail::volatilities_at(p, i);
    out.squared_volatility[i] = squared_volatility(atom_w, beta);
    if (i + 1 == points) break;

    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
      log_ret[k] = detail::atom_log_return(p, k, i);
      m = std::max(m, log_ret[k]);
    }
    const double savings_log_ret = p.log_savings[i + 1] - p.log_savings[i];
    if (w.includes_savings) m = std::max(m, savings_log_ret);

    double gross = 0.0;
    for (std::size_t k = 0; k < n; ++k) gross += atom_w[k] * std::exp(log_ret[k] - m);
    if (w.includes_savings) gross += w.savings() * std::exp(savings_log_ret - m);

    double inc;
    if (gross > 0.0) {
      inc = m + std::log(gross);
    } else {
      ++out.nonpositive_steps;
      inc = std::log(std::numeric_limits<double>::min());
    }
    out.log_increment[i] = inc;
    out.log_value[i + 1] = out.log_value[i] + inc;
  }
  return out;
}

// Per grid point, max_k |pi_MVP^k - pi_AP^k|.
inline std::vector<double> mvp_equals_ap_check(const MarketConfig& cfg, const MarketPath& p) {
  std::vector<double> out(p.points());
  for (std::size_t i = 0; i < p.points(); ++i) {
    const auto mvp = mvp_weights_from_precision(detail::precisions_at(cfg, p, i));
    const auto ap = ap_weights(p, i);
    double worst = 0.0;
    for (std::size_t k = 0; k < ap.size(); ++k) {
      worst = std::max(worst, std::abs(mvp.weights[k] - ap[k]));
    }
    out[i] = worst;
  }
  return out;
}

struct AtomSum {
  PortfolioPath portfolio;
  std::vector<double> normalized;  // sum of Y^k over the index set
  SquareRootSpec predicted;        // law of the normalized sum in activity time
};

inline AtomSum sum_of_atoms(const MarketConfig& cfg, const MarketPath& p,
                            std::span<const std::size_t> atoms) {
  detail::check_index_set(atoms, p.atoms());
  AtomSum out;
  out.portfolio = detail::buy_and_hold(p, atoms);
  out.normalized.assign(p.points(), 0.0);
  double mean = 0.0;
  for (std::size_t k : atoms) {
    mean += cfg.risk_premium_factors[k];
    for (std::size_t i = 0; i < p.points(); ++i) out.normalized[i] += p.normalized[k][i];
  }
  out.predicted = SquareRootSpec::from_mean(mean);
  return out;
}

struct AtomGopPath {
  PortfolioPath portfolio;              // S*
  std::vector<double> variance_factor;  // Z_t = (sigma*_t)^2 / a_t
  std::vector<double> normalized;       // Y* = S* / (B exp(tau* - tau*_0))
  std::vector<double> clock;            // tau*, tau*_0 = 0
  std::vector<double> gop_activity;     // a*_t = a_t Z_t Y*_t
  std::vector<double> brownian_increments;  // dW* over each grid step
};

// Brownian increment of atom k over step i implied by its normalized path.
inline double implied_brownian_increment(const MarketConfig& cfg, const MarketPath& p,
                                         std::size_t k, std::size_t i) {
  const double dt = cfg.grid_step;
  const double y = std::max(p.normalized[k][i], kVolatilityFloor);
  const double dtau = p.clock[k][i + 1] - p.clock[k][i];
  const double omega = cfg.risk_premium_factors[k];
  const double f = std::max(cfg.volatility_function(y), kVolatilityFloor);
  const double drift = y * (omega / f - 1.0) * dtau;
  const double diffusion = y / std::sqrt(f) * std::sqrt(dtau / dt);
  return (p.normalized[k][i + 1] - p.normalized[k][i] - drift) / diffusion;
}

inline AtomGopPath atom_gop_path(const MarketConfig& cfg, const MarketPath& p) {
  const std::size_t points = p.points();
  const std::size_t n = p.atoms();
  const double dt = cfg.grid_step;
  const auto& omega = cfg.risk_premium_factors;

  AtomGopPath out;
  out.portfolio = portfolio_path(AtomGopRule{}, cfg, p);
  out.variance_factor.resize(points);
  out.normalized.resize(points);
  out.clock.resize(points);
  out.gop_activity.resize(points);
  out.brownian_increments.resize(points > 0 ? points - 1 : 0);

  for (std::size_t i = 0; i < points; ++i) {
    out.variance_factor[i] = out.portfolio.squared_volatility[i] / p.activity[i];
  }

  out.normalized[0] = out.portfolio.value(0);
  out.clock[0] = 0.0;
  for (std::size_t i = 0; i + 1 < points; ++i) {
    const double z = out.variance_factor[i];
    const double rate = p.activity[i] * z * out.normalized[i];
    out.gop_activity[i] = rate;
    const double growth = rate * dt;
    out.clock[i + 1] = out.clock[i] + std::log1p(growth);
    const double log_x_inc = out.portfolio.log_increment[i] - (p.log_basis[i + 1] - p.log_basis[i]);
    out.normalized[i + 1] = out.normalized[i] * std::exp(log_x_inc) / (1.0 + growth);

    double dw = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      dw += omega[k] * p.volatility[k][i] * implied_brownian_increment(cfg, p, k, i);
    }
    out.brownian_increments[i] = dw / std::sqrt(out.portfolio.squared_volatility[i]);
  }
  if (points > 0) {
    const std::size_t last = points - 1;
    out.gop_activity[last] = p.activity[last] * out.variance_factor[last] * out.normalized[last];
  }
  return out;
}

}  // namespace imm
