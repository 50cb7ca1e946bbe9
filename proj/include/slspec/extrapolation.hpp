#pragma once

// Limits of sampled sequences: polynomial extrapolation to zero and
// convergence/divergence detection along geometric schedules.

#include <cmath>
#include <complex>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "slspec/error.hpp"

namespace slspec {

/// Value at x = 0 of the interpolating polynomial through (xs[i], ys[i]) (Neville).
template <class T>
T neville_at_zero(std::span<const double> xs, std::span<const T> ys) {
  if (xs.size() != ys.size() || xs.empty()) throw ConfigError("extrapolation needs matching, non-empty samples");
  std::vector<T> p(ys.begin(), ys.end());
  const std::size_t n = xs.size();
  for (std::size_t level = 1; level < n; ++level)
    for (std::size_t i = 0; i + level < n; ++i)
      p[i] = (xs[i + level] * p[i] - xs[i] * p[i + 1]) / (xs[i + level] - xs[i]);
  return p[0];
}

/// Settings for limits along y_k = y0 * 2^k.
struct LimitConfig {
  double y0 = 1.0;
  int k_max = 40;
  /// Three successive estimates agreeing to this relative tolerance count as converged.
  double rel_tol = 1e-8;
  /// Absolute agreement floor for limits at (or near) zero.
  double abs_floor = 1e-10;
  /// Successive growth ratio above which a tail is considered divergent.
  double divergence_ratio = 1.05;
};

enum class LimitStatus { Converged, Divergent };

template <class T>
struct LimitResult {
  LimitStatus status = LimitStatus::Converged;
  T value{};
};

namespace detail {

template <class T>
bool agree(const T& x, const T& y, const LimitConfig& cfg) {
  return std::abs(x - y) <= std::max(cfg.rel_tol * std::max(std::abs(x), std::abs(y)), cfg.abs_floor);
}

template <class T>
std::string format_tail(std::span<const T> seq, std::size_t count) {
  std::string out;
  const std::size_t start = seq.size() > count ? seq.size() - count : 0;
  char buf[96];
  for (std::size_t i = start; i < seq.size(); ++i) {
    if constexpr (std::is_same_v<T, double>) std::snprintf(buf, sizeof buf, "%.10g", seq[i]);
    else std::snprintf(buf, sizeof buf, "%.10g%+.10gi", seq[i].real(), seq[i].imag());
    if (!out.empty()) out += ", ";
    out += buf;
  }
  return out;
}

}  // namespace detail

/// Decides the limit of seq (sampled along the geometric schedule). Tries the
/// raw sequence first; a tail that keeps growing by more than
/// divergence_ratio per step is Divergent; a contracting tail gets one more
/// chance through its Aitken delta-squared transform. Anything else throws
/// UnresolvedAsymptoticsError.
template <class T>
LimitResult<T> geometric_limit(std::span<const T> seq, const LimitConfig& cfg, const std::string& what) {
  const std::size_t n = seq.size();
  for (std::size_t k = 2; k < n; ++k)
    if (detail::agree(seq[k], seq[k - 1], cfg) && detail::agree(seq[k - 1], seq[k - 2], cfg))
      return {LimitStatus::Converged, seq[k]};

  constexpr std::size_t kRun = 5;
  if (n > kRun) {
    bool growing = true;
    for (std::size_t k = n - kRun; k < n; ++k)
      if (!(std::abs(seq[k]) > cfg.divergence_ratio * std::abs(seq[k - 1]))) growing = false;
    if (growing) return {LimitStatus::Divergent, seq.back()};
  }

  // Aitken only makes sense for a contracting tail; applied to a growing
  // geometric sequence it would return a spurious antilimit.
  bool contracting = n > kRun + 1;
  for (std::size_t k = n - kRun; contracting && k < n; ++k)
    if (!(std::abs(seq[k] - seq[k - 1]) < 0.95 * std::abs(seq[k - 1] - seq[k - 2]))) contracting = false;
  if (contracting) {
    std::vector<T> aitken;
    for (std::size_t k = 2; k < n; ++k) {
      const T d1 = seq[k] - seq[k - 1];
      const T d2 = seq[k] - 2.0 * seq[k - 1] + seq[k - 2];
      aitken.push_back(std::abs(d2) == 0 ? seq[k] : seq[k] - d1 * d1 / d2);
    }
    for (std::size_t k = 2; k < aitken.size(); ++k)
      if (detail::agree(aitken[k], aitken[k - 1], cfg) && detail::agree(aitken[k - 1], aitken[k - 2], cfg))
        return {LimitStatus::Converged, aitken[k]};
  }
  throw UnresolvedAsymptoticsError("unresolved limit of " + what, detail::format_tail(seq, 6));
}

}  // namespace slspec
