#pragma once

// Globally adaptive 7/15-point Gauss-Kronrod integration (QUADPACK QAG style).

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "slspec/error.hpp"

namespace slspec {

/// Tolerances shared by every quadrature and by the ODE propagator.
struct QuadConfig {
  double abs_tol = 1e-13;
  double rel_tol = 1e-11;
  int max_subdivisions = 400;
  /// Local error tolerance of the Runge-Kutta propagation.
  double ode_tol = 1e-12;

  void validate() const {
    if (!(abs_tol > 0) || !(rel_tol > 0) || !(ode_tol > 0))
      throw ConfigError("quadrature tolerances must be strictly positive");
    if (max_subdivisions < 8) throw ConfigError("max_subdivisions must be at least 8");
  }
};

template <class T>
struct QuadResult {
  T value{};
  double error = 0;
  int subdivisions = 0;
};

namespace detail {

inline double magnitude(double x) { return std::abs(x); }
inline double magnitude(const std::complex<double>& z) { return std::abs(z); }

// QUADPACK qk15 abscissae and weights.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class T>
struct Interval {
  double lo, hi;
  T value;
  double error;
  bool operator<(const Interval& o) const { return error < o.error; }
};

template <class T, class F>
Interval<T> gk15(F& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const T fc = f(center);
  T kronrod = fc * kWgk[7];
  T gauss = fc * kWg[3];
  T fv1[7], fv2[7];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    fv1[j] = f(center - dx);
    fv2[j] = f(center + dx);
    const T pair = fv1[j] + fv2[j];
    kronrod += kWgk[j] * pair;
    if (j % 2 == 1) gauss += kWg[j / 2] * pair;
  }
  const T mean = kronrod * 0.5;
  double asc = kWgk[7] * magnitude(fc - mean);
  for (int j = 0; j < 7; ++j) asc += kWgk[j] * (magnitude(fv1[j] - mean) + magnitude(fv2[j] - mean));
  asc *= std::abs(half);
  double err = magnitude((kronrod - gauss) * half);
  if (asc != 0 && err != 0) err = asc * std::min(1.0, std::pow(200 * err / asc, 1.5));
  return {lo, hi, kronrod * half, err};
}

}  // namespace detail

/// Integrates f over [lo, hi] until the error estimate drops below
/// max(abs_tol, rel_tol * |I|). Throws QuadratureError when the subdivision
/// budget runs out first.
template <class T, class F>
QuadResult<T> integrate(F&& f, double lo, double hi, const QuadConfig& cfg) {
  if (lo == hi) return {};
  std::priority_queue<detail::Interval<T>> heap;
  auto first = detail::gk15<T>(f, lo, hi);
  T total = first.value;
  double total_err = first.error;
  heap.push(first);
  int n = 1;
  auto converged = [&] {
    return total_err <= std::max(cfg.abs_tol, cfg.rel_tol * detail::magnitude(total));
  };
  while (!converged()) {
    if (n >= cfg.max_subdivisions) {
      // Roundoff floor: the remaining error cannot be reduced any further.
      if (total_err <= 50 * std::numeric_limits<double>::epsilon() * detail::magnitude(total)) break;
      throw QuadratureError("quadrature did not converge on [" + std::to_string(lo) + ", " +
                            std::to_string(hi) + "] (error estimate " + std::to_string(total_err) + ")");
    }
    auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    auto left = detail::gk15<T>(f, worst.lo, mid);
    auto right = detail::gk15<T>(f, mid, worst.hi);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++n;
    if (!std::isfinite(detail::magnitude(total)))
      throw QuadratureError("non-finite integrand encountered");
  }
  // Re-sum to shed accumulated cancellation in the running totals.
  T sum{};
  double err = 0;
  while (!heap.empty()) {
    sum += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  return {sum, err, n};
}

}  // namespace slspec
