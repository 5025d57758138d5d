#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <stdexcept>
#include <type_traits>

namespace gwflow {

struct QuadratureResult {
  double error = 0.0;
  int evaluations = 0;
};

namespace detail {

template <class F, class V>
V gk_adapt(F& f, double a, double b, double tol, int depth, QuadratureResult& info) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  double err = 0.0;
  const V v = GK::integrate(f, a, b, 0, 0.0, &err);
  info.evaluations += 15;
  if (err <= tol || b - a < 1e-13) {
    info.error += err;
    return v;
  }
  if (depth == 0) throw std::runtime_error("quadrature did not converge on [" + std::to_string(a) + ", " +
                                           std::to_string(b) + "]");
  const double m = 0.5 * (a + b);
  return gk_adapt<F, V>(f, a, m, 0.5 * tol, depth - 1, info) + gk_adapt<F, V>(f, m, b, 0.5 * tol, depth - 1, info);
}

}  // namespace detail

/// Adaptive 7/15-point Gauss-Kronrod to an absolute error `tol`. The interval
/// is first cut into panels no wider than `panel` (pass the half period of the
/// integrand's oscillation) so that each panel sees at most one phase zero.
template <class F>
auto integrate(F&& f, double a, double b, double tol = 1e-10, double panel = 0.0, QuadratureResult* info = nullptr) {
  using V = std::decay_t<decltype(f(a))>;
  QuadratureResult local;
  if (b == a) return V{};
  const int panels = panel > 0.0 ? static_cast<int>(std::ceil((b - a) / panel)) : 1;
  const double h = (b - a) / panels;
  V sum{};
  for (int i = 0; i < panels; ++i) {
    const double lo = a + i * h;
    const double hi = i + 1 == panels ? b : lo + h;
    sum += detail::gk_adapt<F, V>(f, lo, hi, tol / panels, 40, local);
  }
  if (info) *info = local;
  return sum;
}

}  // namespace gwflow
