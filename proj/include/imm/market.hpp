#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace imm {

// Clamp applied to normalized atom values before evaluating 1/Y-type
// quantities (volatility, GOP variance). Processes of dimension < 2 touch
// zero with positive probability.
inline constexpr double kVolatilityFloor = 1e-12;

// Tolerance for every "weights sum to one" and "risk premium factors sum to
// one" invariant.
inline constexpr double kSumTolerance = 1e-12;

enum class Mode { info_minimizing, general_stationary };

struct ConstantRate {
  double r0 = 0.0;
};

// Positive square-root (CIR) interest rate in calendar time.
struct MeanRevertingRate {
  double r0 = 0.0;
  double speed = 0.0;
  double level = 0.0;
  double vol = 0.0;
};

using RateModel = std::variant<ConstantRate, MeanRevertingRate>;

struct ConstantActivity {
  double a0 = 0.0;
};

// Square-root activity process in calendar time.
struct CirActivity {
  double a0 = 0.0;
  double speed = 0.0;
  double level = 0.0;
  double vol = 0.0;
};

using ActivitySpec = std::variant<ConstantActivity, CirActivity>;

struct ActivityModel {
  // One entry when shared_across_atoms, otherwise one per atom.
  std::vector<ActivitySpec> atoms;
  bool shared_across_atoms = true;

  const ActivitySpec& spec_for(std::size_t k) const {
    return shared_across_atoms ? atoms.front() : atoms.at(k);
  }
};

// phi(y) = sum_j coefficients[j] * y^j. The identity {0, 1} is the
// information-minimizing volatility function.
struct VolatilityFunction {
  std::vector<double> coefficients{0.0, 1.0};

  double operator()(double y) const {
    double acc = 0.0;
    for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) {
      acc = acc * y + *it;
    }
    return acc;
  }

  bool is_identity() const {
    for (std::size_t j = 0; j < coefficients.size(); ++j) {
      const double expected = (j == 1) ? 1.0 : 0.0;
      if (coefficients[j] != expected) return false;
    }
    return coefficients.size() >= 2;
  }

  static VolatilityFunction identity() { return {}; }
};

struct SampleStationary {};

using InitialValues = std::variant<SampleStationary, std::vector<double>>;

struct MarketConfig {
  std::size_t n = 1;
  std::vector<double> risk_premium_factors{1.0};
  Mode mode = Mode::info_minimizing;
  VolatilityFunction volatility_function{};
  RateModel interest_rate = ConstantRate{0.0};
  ActivityModel activity{{ConstantActivity{1.0}}, true};
  double net_risk_adjusted_return = 0.0;
  InitialValues initial_values = SampleStationary{};
  double horizon = 1.0;
  double grid_step = 0.01;
  std::size_t paths = 1;
  std::uint64_t seed = 0;

  std::size_t steps() const {
    return static_cast<std::size_t>(std::floor(horizon / grid_step + 1e-9));
  }
};

// Square-root process dY = speed (mean - Y) dt + diffusion_scale sqrt(Y) dW in
// its own clock.
struct SquareRootSpec {
  double dimension = 4.0;
  double mean = 1.0;
  double speed = 1.0;
  double diffusion_scale = 1.0;

  static SquareRootSpec from_mean(double mean, double speed = 1.0,
                                  double diffusion_scale = 1.0) {
    return {4.0 * speed * mean / (diffusion_scale * diffusion_scale), mean,
            speed, diffusion_scale};
  }

  // Normalized atom of an n-atom information-minimizing market.
  static SquareRootSpec normalized_atom(std::size_t n) {
    return from_mean(1.0 / static_cast<double>(n));
  }

  bool consistent(double tol = 1e-12) const {
    const double d = 4.0 * speed * mean / (diffusion_scale * diffusion_scale);
    return std::abs(d - dimension) <= tol * std::max(1.0, dimension);
  }
};

struct ValidationReport {
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
  explicit operator bool() const { return ok(); }
};

namespace detail {

inline bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

inline void check_square_root_params(const char* what, double x0, double speed,
                                     double level, double vol,
                                     std::vector<std::string>& out) {
  const std::string name(what);
  if (!finite_positive(x0)) out.push_back(name + ": initial value must be > 0");
  if (!finite_positive(speed)) out.push_back(name + ": speed must be > 0");
  if (!finite_positive(level)) out.push_back(name + ": level must be > 0");
  if (!finite_positive(vol)) out.push_back(name + ": vol must be > 0");
  // Feller condition keeps the sampled process strictly positive.
  if (finite_positive(speed) && finite_positive(level) &&
      finite_positive(vol) && 2.0 * speed * level < vol * vol) {
    out.push_back(name + ": Feller condition 2*speed*level >= vol^2 violated");
  }
}

}  // namespace detail

inline ValidationReport validate_config(const MarketConfig& cfg) {
  ValidationReport report;
  auto& v = report.violations;

  if (cfg.n < 1) v.emplace_back("n must be >= 1");
  if (cfg.risk_premium_factors.size() != cfg.n) {
    v.emplace_back("risk_premium_factors must have n entries");
  } else {
    bool positive = true;
    for (double w : cfg.risk_premium_factors) {
      if (!detail::finite_positive(w)) positive = false;
    }
    if (!positive) v.emplace_back("all risk premium factors must be > 0");
    const double sum = std::accumulate(cfg.risk_premium_factors.begin(),
                                       cfg.risk_premium_factors.end(), 0.0);
    if (std::abs(sum - 1.0) > kSumTolerance) {
      v.emplace_back("sum of risk premium factors must equal 1 (got " +
                     std::to_string(sum) + ")");
    }
    if (cfg.mode == Mode::info_minimizing) {
      const double uniform = 1.0 / static_cast<double>(cfg.n);
      for (double w : cfg.risk_premium_factors) {
        if (std::abs(w - uniform) > kSumTolerance) {
          v.emplace_back("info-minimizing mode: omega must equal 1/n");
          break;
        }
      }
    }
  }

  if (cfg.mode == Mode::info_minimizing) {
    if (!cfg.volatility_function.is_identity()) {
      v.emplace_back("info-minimizing mode: volatility function must be phi(y) = y");
    }
    if (!cfg.activity.shared_across_atoms) {
      v.emplace_back("info-minimizing mode: activity must be shared across atoms");
    }
  } else {
    const auto& c = cfg.volatility_function.coefficients;
    bool nonneg = !c.empty();
    bool any_positive = false;
    for (double x : c) {
      if (!(std::isfinite(x) && x >= 0.0)) nonneg = false;
      if (x > 0.0) any_positive = true;
    }
    if (!nonneg || !any_positive) {
      v.emplace_back("volatility function coefficients must be >= 0 and not all zero");
    }
  }

  if (cfg.activity.atoms.empty()) {
    v.emplace_back("activity model must have at least one entry");
  } else if (!cfg.activity.shared_across_atoms &&
             cfg.activity.atoms.size() != cfg.n) {
    v.emplace_back("per-atom activity requires n entries");
  }
  for (const auto& spec : cfg.activity.atoms) {
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, ConstantActivity>) {
            if (!detail::finite_positive(s.a0)) v.emplace_back("activity a0 must be > 0");
          } else {
            detail::check_square_root_params("activity", s.a0, s.speed, s.level,
                                             s.vol, v);
          }
        },
        spec);
  }

  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ConstantRate>) {
          if (!std::isfinite(s.r0)) v.emplace_back("interest rate must be finite");
        } else {
          detail::check_square_root_params("interest rate", s.r0, s.speed,
                                           s.level, s.vol, v);
        }
      },
      cfg.interest_rate);

  if (!std::isfinite(cfg.net_risk_adjusted_return)) {
    v.emplace_back("net risk-adjusted return must be finite");
  }

  if (const auto* init = std::get_if<std::vector<double>>(&cfg.initial_values)) {
    if (init->size() != cfg.n) v.emplace_back("initial_values must have n entries");
    for (double x : *init) {
      if (!detail::finite_positive(x)) {
        v.emplace_back("initial values must be > 0");
        break;
      }
    }
  } else if (!cfg.volatility_function.is_identity()) {
    v.emplace_back("sample-stationary initial values require phi(y) = y");
  }

  if (!detail::finite_positive(cfg.grid_step)) v.emplace_back("grid_step must be > 0");
  if (!std::isfinite(cfg.horizon) || cfg.horizon < cfg.grid_step) {
    v.emplace_back("horizon must be >= grid_step");
  }
  if (cfg.paths < 1) v.emplace_back("paths must be >= 1");
  return report;
}

// Throws std::invalid_argument listing every violation.
inline void require_valid(const MarketConfig& cfg) {
  const auto report = validate_config(cfg);
  if (report.ok()) return;
  std::string msg = "invalid market config:";
  for (const auto& s : report.violations) msg += "\n  - " + s;
  throw std::invalid_argument(msg);
}

// lambda* = r + lambda_hat * a.
inline double effective_lambda_star(double r, double a, double lambda_hat) {
  if (!std::isfinite(r) || !std::isfinite(a) || !std::isfinite(lambda_hat)) {
    throw std::invalid_argument("effective_lambda_star: non-finite input");
  }
  if (!(a > 0.0)) throw std::invalid_argument("effective_lambda_star: activity must be > 0");
  return r + lambda_hat * a;
}

// Harmonic-type aggregate of per-atom activities:
// a = (sum_k omega_k / sqrt(a_k))^-2.
inline double average_activity(const std::vector<double>& omega,
                               const std::vector<double>& activities) {
  double acc = 0.0;
  for (std::size_t k = 0; k < omega.size(); ++k) {
    acc += omega[k] / std::sqrt(activities[k]);
  }
  return 1.0 / (acc * acc);
}

// One simulated trajectory. Indexing is [atom][grid point]. Atom values,
// savings account and basis exponential are stored in log form because
// exp(activity time) overflows over long horizons.
struct MarketPath {
  std::vector<double> rate;                 // r_t
  std::vector<double> activity;             // average activity a_t
  std::vector<double> risk_adjusted_return; // lambda*_t
  std::vector<double> log_basis;            // ln B_t
  std::vector<double> log_savings;          // ln A^0_t
  std::vector<std::vector<double>> atom_activity;  // empty when shared
  std::vector<std::vector<double>> normalized;     // Y^k
  std::vector<std::vector<double>> clock;          // tau^k
  std::vector<std::vector<double>> log_value;      // ln A^k
  std::vector<std::vector<double>> volatility;     // beta^k

  std::size_t atoms() const { return normalized.size(); }
  std::size_t points() const { return rate.size(); }

  double activity_of(std::size_t k, std::size_t i) const {
    return atom_activity.empty() ? activity[i] : atom_activity[k][i];
  }
  double atom_value(std::size_t k, std::size_t i) const {
    return std::exp(log_value[k][i]);
  }
  double basis(std::size_t i) const { return std::exp(log_basis[i]); }
  double savings(std::size_t i) const { return std::exp(log_savings[i]); }
};

struct PathSet {
  MarketConfig config;
  std::vector<double> time_grid;
  std::vector<MarketPath> paths;
};

// Max relative deviation of A^k_t from Y^k B_t exp(tau^k_t - tau^k_0) over
// all atoms and grid points. Points where Y^k is exactly zero are skipped
// (both sides vanish).
inline double reconstruction_error(const MarketPath& p) {
  double worst = 0.0;
  for (std::size_t k = 0; k < p.atoms(); ++k) {
    for (std::size_t i = 0; i < p.points(); ++i) {
      const double y = p.normalized[k][i];
      if (y <= 0.0) continue;
      const double rebuilt =
          std::log(y) + p.log_basis[i] + (p.clock[k][i] - p.clock[k][0]);
      // ln A - ln(rebuilt) ~ relative error
      worst = std::max(worst, std::abs(std::expm1(p.log_value[k][i] - rebuilt)));
    }
  }
  return worst;
}

}  // namespace imm
