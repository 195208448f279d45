#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace imm {

inline constexpr double kQuadratureTolerance = 1e-10;

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
};

// Integral of f over (0, inf), split at `split`: tanh-sinh on (0, split]
// copes with integrable endpoint singularities at zero, exp-sinh takes the
// tail.
template <class F>
QuadratureResult integrate_half_line(F&& f, double split, double tol = kQuadratureTolerance) {
  if (!(split > 0.0) || !std::isfinite(split)) {
    throw std::invalid_argument("integrate_half_line: split must be finite and > 0");
  }
  static thread_local boost::math::quadrature::tanh_sinh<double> head;
  static thread_local boost::math::quadrature::exp_sinh<double> tail;
  double e1 = 0.0;
  double e2 = 0.0;
  const double a = head.integrate(f, 0.0, split, tol, &e1);
  const double b = tail.integrate(f, split, std::numeric_limits<double>::infinity(), tol, &e2);
  return {a + b, e1 + e2};
}

template <class F>
QuadratureResult integrate_interval(F&& f, double lo, double hi, double tol = kQuadratureTolerance) {
  static thread_local boost::math::quadrature::tanh_sinh<double> q;
  double e = 0.0;
  const double v = q.integrate(f, lo, hi, tol, &e);
  return {v, e};
}

}  // namespace imm
