#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "imm/market.hpp"
#include "imm/parallel.hpp"
#include "imm/rng.hpp"

namespace imm {

// Law of Y_h given Y_0 for a square-root process: Y_h = scale * chi2(dimension,
// noncentrality).
struct TransitionLaw {
  double scale = 0.0;
  double dimension = 0.0;
  double noncentrality = 0.0;

  double mean() const { return scale * (dimension + noncentrality); }
  double variance() const {
    return scale * scale * 2.0 * (dimension + 2.0 * noncentrality);
  }
};

namespace detail {

inline void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) {
    throw std::invalid_argument(std::string("non-finite parameter: ") + what);
  }
}

inline void check_spec(const SquareRootSpec& spec) {
  require_finite(spec.dimension, "dimension");
  require_finite(spec.mean, "mean");
  require_finite(spec.speed, "speed");
  require_finite(spec.diffusion_scale, "diffusion_scale");
  if (!(spec.dimension > 0.0) || !(spec.diffusion_scale > 0.0) || spec.speed < 0.0) {
    throw std::invalid_argument("square-root spec: dimension and diffusion scale must be > 0");
  }
}

// Beyond this Poisson mean the mixture is replaced by its Gaussian limit.
inline constexpr double kPoissonGaussianSwitch = 1e12;

}  // namespace detail

inline TransitionLaw transition_law(const SquareRootSpec& spec, double y0, double h) {
  detail::check_spec(spec);
  const double s2 = spec.diffusion_scale * spec.diffusion_scale;
  double c;
  double decay;
  if (spec.speed == 0.0) {
    c = s2 * h / 4.0;
    decay = 1.0;
  } else {
    c = s2 * (-std::expm1(-spec.speed * h)) / (4.0 * spec.speed);
    decay = std::exp(-spec.speed * h);
  }
  return {c, spec.dimension, c > 0.0 ? y0 * decay / c : 0.0};
}

// Noncentral chi-squared draw as a Poisson mixture of central chi-squares.
template <class Urbg>
double sample_noncentral_chi2(double dimension, double noncentrality, Urbg& rng) {
  long long mix = 0;
  if (noncentrality > 0.0) {
    mix = std::poisson_distribution<long long>(0.5 * noncentrality)(rng);
  }
  const double shape = 0.5 * dimension + static_cast<double>(mix);
  return 2.0 * std::gamma_distribution<double>(shape, 1.0)(rng);
}

// Conditional mean and variance of a square-root process after time h.
inline double square_root_mean(const SquareRootSpec& s, double y0, double h) {
  return s.mean + (y0 - s.mean) * std::exp(-s.speed * h);
}

inline double square_root_variance(const SquareRootSpec& s, double y0, double h) {
  const double e1 = std::exp(-s.speed * h);
  const double s2 = s.diffusion_scale * s.diffusion_scale;
  return y0 * s2 * (e1 - e1 * e1) / s.speed +
         s.mean * s2 * (1.0 - e1) * (1.0 - e1) / (2.0 * s.speed);
}

// One exact transition of the square-root process over clock increment h.
template <class Urbg>
double sample_srou_exact(const SquareRootSpec& spec, double y0, double h, Urbg& rng) {
  detail::require_finite(y0, "y0");
  detail::require_finite(h, "h");
  if (y0 < 0.0) throw std::invalid_argument("sample_srou_exact: y0 must be >= 0");
  if (!(h > 0.0)) throw std::invalid_argument("sample_srou_exact: h must be > 0");
  const TransitionLaw law = transition_law(spec, y0, h);
  if (!(law.scale > 0.0) || law.noncentrality > detail::kPoissonGaussianSwitch) {
    const double m = law.scale > 0.0 ? law.mean() : y0;
    const double sd = law.scale > 0.0 ? std::sqrt(law.variance()) : 0.0;
    const double z = std::normal_distribution<double>{}(rng);
    return std::max(0.0, m + sd * z);
  }
  return law.scale * sample_noncentral_chi2(law.dimension, law.noncentrality, rng);
}

// Squared Bessel process of the given dimension started at x, run for time u.
template <class Urbg>
double sample_besq(double dimension, double x, double u, Urbg& rng) {
  return sample_srou_exact(SquareRootSpec{dimension, 0.0, 0.0, 2.0}, x, u, rng);
}

// Full-truncation Euler scheme: the state is floored at zero inside drift and
// diffusion, the returned value is floored at zero.
template <class Urbg>
double sample_srou_euler(const SquareRootSpec& spec, double y0, double h,
                         std::size_t substeps, Urbg& rng) {
  detail::check_spec(spec);
  detail::require_finite(y0, "y0");
  detail::require_finite(h, "h");
  if (substeps < 1) throw std::invalid_argument("sample_srou_euler: substeps must be >= 1");
  if (!(h > 0.0)) throw std::invalid_argument("sample_srou_euler: h must be > 0");
  const double dt = h / static_cast<double>(substeps);
  const double sdt = std::sqrt(dt);
  const double floor_drift = 0.25 * spec.dimension * spec.diffusion_scale * spec.diffusion_scale;
  std::normal_distribution<double> normal;
  double y = y0;
  for (std::size_t j = 0; j < substeps; ++j) {
    const double yp = std::max(y, 0.0);
    y += (floor_drift - spec.speed * yp) * dt +
         spec.diffusion_scale * std::sqrt(yp) * sdt * normal(rng);
  }
  return std::max(y, 0.0);
}

// Euler scheme with reflection for a normalized atom with a general volatility
// function: dY = Y (omega/phi(Y) - 1) dtau + Y phi(Y)^(-1/2) dW_tau.
template <class Urbg>
double sample_normalized_euler(const VolatilityFunction& phi, double omega, double y0,
                               double h, std::size_t substeps, Urbg& rng) {
  constexpr double kStateFloor = 1e-8;
  const double dt = h / static_cast<double>(substeps);
  const double sdt = std::sqrt(dt);
  std::normal_distribution<double> normal;
  double y = y0;
  for (std::size_t j = 0; j < substeps; ++j) {
    const double yp = std::max(y, kStateFloor);
    const double f = std::max(phi(yp), kVolatilityFloor);
    y += yp * (omega / f - 1.0) * dt + yp / std::sqrt(f) * sdt * normal(rng);
    y = std::abs(y);
  }
  return y;
}

namespace detail {

inline constexpr std::size_t kGeneralEulerSubsteps = 16;

struct ScalarDriver {
  bool stochastic = false;
  double value = 0.0;
  SquareRootSpec spec{};
};

inline ScalarDriver make_driver(const RateModel& m) {
  if (const auto* c = std::get_if<ConstantRate>(&m)) return {false, c->r0, {}};
  const auto& s = std::get<MeanRevertingRate>(m);
  return {true, s.r0, SquareRootSpec::from_mean(s.level, s.speed, s.vol)};
}

inline ScalarDriver make_driver(const ActivitySpec& m) {
  if (const auto* c = std::get_if<ConstantActivity>(&m)) return {false, c->a0, {}};
  const auto& s = std::get<CirActivity>(m);
  return {true, s.a0, SquareRootSpec::from_mean(s.level, s.speed, s.vol)};
}

template <class Urbg>
double advance(const ScalarDriver& d, double x, double dt, Urbg& rng) {
  return d.stochastic ? sample_srou_exact(d.spec, x, dt, rng) : x;
}

}  // namespace detail

// Non-fatal diagnostics about the time grid.
inline std::vector<std::string> grid_warnings(const MarketConfig& cfg) {
  std::vector<std::string> out;
  for (const auto& spec : cfg.activity.atoms) {
    if (const auto* s = std::get_if<CirActivity>(&spec)) {
      if (s->speed * cfg.grid_step > 0.5) {
        out.emplace_back("grid_step is coarse relative to activity mean reversion; "
                         "activity-time quadrature error may be large");
      }
    }
  }
  return out;
}

inline std::vector<double> time_grid(const MarketConfig& cfg) {
  const std::size_t steps = cfg.steps();
  std::vector<double> t(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) t[i] = static_cast<double>(i) * cfg.grid_step;
  return t;
}

// Simulates one path. The stream for path p is RngStream(cfg.seed, p), so a
// path is reproducible independently of how paths are distributed to workers.
inline MarketPath simulate_path(const MarketConfig& cfg, std::size_t path_index) {
  const std::size_t n = cfg.n;
  const std::size_t steps = cfg.steps();
  const std::size_t points = steps + 1;
  const double dt = cfg.grid_step;
  const auto& omega = cfg.risk_premium_factors;
  const bool shared = cfg.activity.shared_across_atoms;
  const bool identity_phi = cfg.volatility_function.is_identity();
  const double lambda_hat = cfg.net_risk_adjusted_return;

  RngStream rng(cfg.seed, path_index);
  MarketPath p;
  p.rate.resize(points);
  p.activity.resize(points);
  p.risk_adjusted_return.resize(points);
  p.log_basis.resize(points);
  p.log_savings.resize(points);
  if (!shared) p.atom_activity.assign(n, std::vector<double>(points));
  p.normalized.assign(n, std::vector<double>(points));
  p.clock.assign(n, std::vector<double>(points));
  p.log_value.assign(n, std::vector<double>(points));
  p.volatility.assign(n, std::vector<double>(points));

  std::vector<SquareRootSpec> atom_specs(n);
  for (std::size_t k = 0; k < n; ++k) atom_specs[k] = SquareRootSpec::from_mean(omega[k]);

  if (const auto* init = std::get_if<std::vector<double>>(&cfg.initial_values)) {
    for (std::size_t k = 0; k < n; ++k) p.normalized[k][0] = (*init)[k];
  } else {
    for (std::size_t k = 0; k < n; ++k) {
      p.normalized[k][0] = std::gamma_distribution<double>(2.0 * omega[k], 0.5)(rng);
    }
  }

  const auto rate_driver = detail::make_driver(cfg.interest_rate);
  std::vector<detail::ScalarDriver> act_drivers;
  for (const auto& s : cfg.activity.atoms) act_drivers.push_back(detail::make_driver(s));

  std::vector<double> act(shared ? 1 : n);
  for (std::size_t j = 0; j < act.size(); ++j) act[j] = act_drivers[j].value;
  std::vector<double> atom_act(n);

  auto fill_activity = [&](std::size_t i) {
    for (std::size_t k = 0; k < n; ++k) atom_act[k] = shared ? act[0] : act[k];
    if (!shared) {
      for (std::size_t k = 0; k < n; ++k) p.atom_activity[k][i] = atom_act[k];
      p.activity[i] = average_activity(omega, atom_act);
    } else {
      p.activity[i] = act[0];
    }
  };

  auto fill_derived = [&](std::size_t i) {
    p.risk_adjusted_return[i] = p.rate[i] + lambda_hat * p.activity[i];
    for (std::size_t k = 0; k < n; ++k) {
      const double y = p.normalized[k][i];
      const double f = identity_phi ? y : cfg.volatility_function(y);
      p.volatility[k][i] = std::sqrt(atom_act[k] / std::max(f, kVolatilityFloor));
      p.log_value[k][i] = std::log(y) + p.log_basis[i] + (p.clock[k][i] - p.clock[k][0]);
    }
  };

  p.rate[0] = rate_driver.value;
  fill_activity(0);
  p.log_basis[0] = 0.0;
  p.log_savings[0] = 0.0;
  for (std::size_t k = 0; k < n; ++k) p.clock[k][0] = 0.0;
  fill_derived(0);

  for (std::size_t i = 0; i < steps; ++i) {
    const std::vector<double> prev_act = atom_act;
    p.rate[i + 1] = detail::advance(rate_driver, p.rate[i], dt, rng);
    for (std::size_t j = 0; j < act.size(); ++j) {
      act[j] = detail::advance(act_drivers[j], act[j], dt, rng);
    }
    fill_activity(i + 1);

    p.log_savings[i + 1] = p.log_savings[i] + 0.5 * (p.rate[i] + p.rate[i + 1]) * dt;
    const double lambda_next = p.rate[i + 1] + lambda_hat * p.activity[i + 1];
    p.log_basis[i + 1] =
        p.log_basis[i] + 0.5 * (p.risk_adjusted_return[i] + lambda_next) * dt;

    for (std::size_t k = 0; k < n; ++k) {
      const double dtau = 0.5 * (prev_act[k] + atom_act[k]) * dt;
      p.clock[k][i + 1] = p.clock[k][i] + dtau;
      const double y = p.normalized[k][i];
      p.normalized[k][i + 1] =
          identity_phi
              ? sample_srou_exact(atom_specs[k], y, dtau, rng)
              : sample_normalized_euler(cfg.volatility_function, omega[k], y, dtau,
                                        detail::kGeneralEulerSubsteps, rng);
    }
    fill_derived(i + 1);
  }
  return p;
}

// Simulates each path and hands it to fn; only fn's results are kept, which
// lets large Monte Carlo runs stream through paths without storing them.
template <class Fn>
auto map_paths(const MarketConfig& cfg, Fn&& fn, std::size_t workers = default_workers()) {
  require_valid(cfg);
  return parallel_map(
      cfg.paths,
      [&](std::size_t p) {
        const MarketPath path = simulate_path(cfg, p);
        return fn(path, p);
      },
      workers);
}

inline PathSet simulate_market(const MarketConfig& cfg, std::size_t workers = default_workers()) {
  require_valid(cfg);
  PathSet set;
  set.config = cfg;
  set.time_grid = time_grid(cfg);
  set.paths = parallel_map(
      cfg.paths, [&](std::size_t p) { return simulate_path(cfg, p); }, workers);
  return set;
}

}  // namespace imm
