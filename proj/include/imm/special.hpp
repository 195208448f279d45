#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace imm {

// Digamma psi(x) for x > 0: upward recurrence to x >= 10, then the
// asymptotic series in 1/x^2.
inline double digamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw std::domain_error("digamma: x must be finite and > 0");
  double acc = 0.0;
  while (x < 10.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double r = 1.0 / (x * x);
  const double series =
      r * (1.0 / 12 -
           r * (1.0 / 120 -
                r * (1.0 / 252 -
                     r * (1.0 / 240 - r * (1.0 / 132 - r * (691.0 / 32760 - r / 12.0))))));
  return acc + std::log(x) - 0.5 / x - series;
}

// Trigamma psi'(x) for x > 0.
inline double trigamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw std::domain_error("trigamma: x must be finite and > 0");
  double acc = 0.0;
  while (x < 10.0) {
    acc += 1.0 / (x * x);
    x += 1.0;
  }
  const double ix = 1.0 / x;
  const double r = ix * ix;
  const double series =
      ix + 0.5 * r +
      ix * r *
          (1.0 / 6 -
           r * (1.0 / 30 -
                r * (1.0 / 42 - r * (1.0 / 30 - r * (5.0 / 66 - r * (691.0 / 2730 - r * 7.0 / 6))))));
  return acc + series;
}

// Solves ln(a) - psi(a) = s for the gamma shape a (s > 0). This is the
// maximum likelihood shape given the log of the arithmetic mean minus the
// mean of the logs.
inline double gamma_shape_from_log_ratio(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw std::domain_error("gamma_shape_from_log_ratio: s must be finite and > 0");
  }
  // Minka's starting point.
  double a = (3.0 - s + std::sqrt((s - 3.0) * (s - 3.0) + 24.0 * s)) / (12.0 * s);
  for (int it = 0; it < 100; ++it) {
    const double f = std::log(a) - digamma(a) - s;
    const double fp = 1.0 / a - trigamma(a);
    double next = a - f / fp;
    if (!(next > 0.0)) next = 0.5 * a;
    if (std::abs(next - a) <= 1e-15 * a) return next;
    a = next;
  }
  return a;
}

inline constexpr double kEulerGamma = std::numbers::egamma;

}  // namespace imm
