#pragma once

// m-function, boundary values of Im m, real poles and their masses, and the
// assembled spectral function with its cumulative distribution.

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include "slspec/error.hpp"
#include "slspec/extrapolation.hpp"
#include "slspec/nevanlinna.hpp"
#include "slspec/parallel.hpp"
#include "slspec/problem.hpp"
#include "slspec/propagator.hpp"

namespace slspec {

/// Default epsilon schedule: 0.1 * 2^-j, j = 0..12.
inline std::vector<double> default_eps_schedule() {
  std::vector<double> eps;
  for (int j = 0; j <= 12; ++j) eps.push_back(0.1 * std::ldexp(1.0, -j));
  return eps;
}

namespace detail {

/// tau at lambda, using the boundary value on the real axis.
inline Projective tau_at(const BoundaryParam& tau, cplx lambda) {
  return lambda.imag() == 0 ? tau.boundary(lambda.real()) : tau.projective(lambda);
}

struct Quotient {
  cplx num, den;
};

/// Numerator and denominator of m at lambda.
inline Quotient m_parts(const SLProblem& problem, const BoundaryParam& tau, cplx lambda) {
  const auto e = endpoint_data(problem, lambda);
  const auto t = tau_at(tau, lambda);
  return {e.psi * t.num - e.psi1 * t.den, e.phi * t.num - e.phi1 * t.den};
}

/// Real-axis denominator from a phi-only shoot.
inline cplx denominator_real(const SLProblem& problem, const BoundaryParam& tau, double u) {
  const auto f = phi_end(problem, u);
  const auto t = tau.boundary(u);
  return f.y * t.num - f.y1 * t.den;
}

inline cplx denominator_complex(const SLProblem& problem, const BoundaryParam& tau, cplx lambda) {
  if (lambda.imag() == 0) return denominator_real(problem, tau, lambda.real());
  const auto e = endpoint_data(problem, lambda);
  const auto t = tau.projective(lambda);
  return e.phi * t.num - e.phi1 * t.den;
}

}  // namespace detail

/// m(lambda) = (psi(b) tau - psi1(b)) / (phi(b) tau - phi1(b)); psi(b)/phi(b) for tau = infinity.
inline cplx m_function(const SLProblem& problem, const BoundaryParam& tau, cplx lambda) {
  if (!std::isfinite(lambda.real()) || !std::isfinite(lambda.imag())) throw ConfigError("lambda must be finite");
  const auto q = detail::m_parts(problem, tau, lambda);
  if (!(std::abs(q.den) > 1e-14 * std::abs(q.num)))
    throw PoleProximityError("m-function denominator vanishes near lambda = " + std::to_string(lambda.real()) +
                             (lambda.imag() >= 0 ? "+" : "") + std::to_string(lambda.imag()) + "i");
  return q.num / q.den;
}

struct PointMass {
  double s = 0;
  double jump = 0;
};

namespace detail {

struct BoundaryEstimate {
  double value = 0;
  /// Absolute resolution of the estimate.
  double noise = 0;
};

/// Boundary value pi * rho(u) of Im m, after removing the Poisson kernels of
/// the given masses, from Neville extrapolation over the smallest-epsilon triple.
inline BoundaryEstimate im_boundary_value(const SLProblem& problem, const BoundaryParam& tau, double u,
                                const std::vector<double>& eps, const std::vector<PointMass>& masses) {
  if (eps.size() < 3) throw ConfigError("epsilon schedule needs at least three entries");
  for (std::size_t i = 0; i < eps.size(); ++i)
    if (!(eps[i] > 0) || (i > 0 && !(eps[i] < eps[i - 1])))
      throw ConfigError("epsilon schedule must be positive and strictly decreasing");
  std::vector<double> im(eps.size());
  double scale = 0;
  for (std::size_t j = 0; j < eps.size(); ++j) {
    double v = m_function(problem, tau, cplx(u, eps[j])).imag();
    for (const auto& pm : masses) {
      const double d = u - pm.s;
      v -= pm.jump * eps[j] / (d * d + eps[j] * eps[j]);
    }
    im[j] = v;
    scale = std::max(scale, std::abs(v));
  }
  const std::size_t n = eps.size();
  auto triple = [&](std::size_t first) {
    return neville_at_zero<double>(std::span<const double>(eps).subspan(first, 3),
                                   std::span<const double>(im).subspan(first, 3));
  };
  const double last = triple(n - 3);
  const double prev = n >= 4 ? triple(n - 4) : last;
  const double noise = 1e-9 * (1 + scale);
  if (std::abs(last - prev) > 1e-3 * std::abs(last) + noise)
    throw PoleContaminatedError("boundary value of Im m does not settle at u = " + std::to_string(u) +
                                " (pole nearby?)");
  return {last, noise};
}

/// Im m(u + i0) = Im tau(u + i0) / |phi(b) tau - phi1(b)|^2, exact because the
/// Wronskian is 1. Keeps full relative accuracy where the density is
/// exponentially small.
inline double im_boundary_direct(const SLProblem& problem, const BoundaryParam& tau, double u) {
  const auto f = phi_end(problem, u);
  const auto t = tau.boundary(u);
  const cplx d = f.y * t.num - f.y1 * t.den;
  return (t.num * std::conj(t.den)).imag() / std::norm(d);
}

inline double clamp_density(double rho, double u) {
  if (rho < 0 && rho > -1e-8) return 0;
  if (rho < 0) throw PoleContaminatedError("negative density " + std::to_string(rho) + " at u = " + std::to_string(u));
  return rho;
}

}  // namespace detail

/// rho(u) = (1/pi) lim_{eps -> 0} Im m(u + i eps).
inline double spectral_density(const SLProblem& problem, const BoundaryParam& tau, double u,
                               const std::vector<double>& eps_schedule = default_eps_schedule()) {
  const double v = detail::im_boundary_value(problem, tau, u, eps_schedule, {}).value;
  return detail::clamp_density(v / std::numbers::pi, u);
}

namespace detail {

/// Integral of sqrt(Delta / |p|) over [a, b]; sets the oscillation scale of phi in lambda.
inline double phase_length(const SLProblem& problem) {
  double w = 0;
  for (const auto& s : problem.segments()) {
    if (s.delta_zero) continue;
    auto f = [&](double t) { return std::sqrt(problem.delta_at(s, t) / std::abs(problem.p_at(s, t))); };
    w += integrate<double>(f, s.t0, s.t1, problem.quad()).value;
  }
  return w;
}

inline std::vector<double> scan_grid(double lo, double hi, double phase) {
  const double cap = (hi - lo) / 64;
  const double floor_root = std::numbers::pi / (8 * phase);
  std::vector<double> u{lo};
  while (u.back() < hi) {
    const double x = u.back();
    const double step = std::min(cap, std::numbers::pi / 4 * std::max(std::sqrt(std::abs(x)), floor_root) / phase);
    // Do not step over zero with a coarse stride; the density of states is highest there.
    double next = x + step;
    if (x < 0 && next > 0) next = 0;
    u.push_back(std::min(next, hi));
  }
  return u;
}

/// Real sub-intervals of [lo, hi] on which the boundary value of tau is real.
inline std::vector<RealInterval> real_intervals(const BoundaryParam& tau, double lo, double hi) {
  std::vector<RealInterval> out;
  double cursor = lo;
  for (auto [l, r] : tau.nonreal_intervals(lo, hi)) {
    if (l > cursor) out.emplace_back(cursor, l);
    cursor = std::max(cursor, r);
  }
  if (cursor < hi) out.emplace_back(cursor, hi);
  return out;
}

/// Winding number of D around the rectangle [c - w, c + w] x [-h, h]; NaN when
/// D jumps along the contour.
inline double winding_number(const SLProblem& problem, const BoundaryParam& tau, double c, double w, double h) {
  const std::array<cplx, 5> corners = {cplx(c - w, -h), cplx(c + w, -h), cplx(c + w, h), cplx(c - w, h),
                                       cplx(c - w, -h)};
  auto D = [&](cplx z) { return detail::denominator_complex(problem, tau, z); };
  double total = 0;
  for (int side = 0; side < 4; ++side) {
    // Adaptive subdivision until successive arguments differ by less than pi/4.
    struct Piece {
      cplx z0, z1;
      cplx d0, d1;
      int depth;
    };
    constexpr int kInitial = 8;
    for (int k = 0; k < kInitial; ++k) {
      const cplx z0 = corners[side] + (corners[side + 1] - corners[side]) * (double(k) / kInitial);
      const cplx z1 = corners[side] + (corners[side + 1] - corners[side]) * (double(k + 1) / kInitial);
      std::vector<Piece> stack{{z0, z1, D(z0), D(z1), 0}};
      while (!stack.empty()) {
        auto pc = stack.back();
        stack.pop_back();
        const double darg = std::arg(pc.d1 / pc.d0);
        if (std::abs(darg) > std::numbers::pi / 4) {
          // A jump that survives refinement means D is discontinuous on the
          // contour (branch cut): there is no winding number to speak of.
          if (pc.depth >= 16) return std::numeric_limits<double>::quiet_NaN();
          const cplx zm = 0.5 * (pc.z0 + pc.z1);
          const cplx dm = D(zm);
          stack.push_back({zm, pc.z1, dm, pc.d1, pc.depth + 1});
          stack.push_back({pc.z0, zm, pc.d0, dm, pc.depth + 1});
        } else {
          total += darg;
        }
      }
    }
  }
  return total / (2 * std::numbers::pi);
}

}  // namespace detail

/// Real poles of m in [lo, hi], ascending, at most max_count of them.
inline std::vector<double> find_eigenvalues(const SLProblem& problem, const BoundaryParam& tau, double lo, double hi,
                                            int max_count = 1 << 20) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) throw ConfigError("empty eigenvalue range: need lo < hi");
  if (max_count < 1) throw ConfigError("max_count must be positive");
  const bool analytic = tau.kind() == BoundaryParam::Kind::Analytic;
  const double phase = detail::phase_length(problem);
  std::vector<double> roots;

  for (auto [l, r] : detail::real_intervals(tau, lo, hi)) {
    std::vector<double> grid = l < r ? detail::scan_grid(l, r, phase) : std::vector<double>{l};
    std::vector<double> d(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) { d[i] = detail::denominator_real(problem, tau, grid[i]).real(); });
    auto D = [&](double u) { return detail::denominator_real(problem, tau, u).real(); };
    auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-12 * (1 + std::abs(a)); };
    auto refine = [&](double a, double b, double fa, double fb) {
      std::uintmax_t iters = 200;
      const auto br = boost::math::tools::toms748_solve(D, a, b, fa, fb, tol, iters);
      return 0.5 * (br.first + br.second);
    };
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (d[i] == 0) {
        roots.push_back(grid[i]);
        continue;
      }
      if (i + 1 < grid.size() && d[i + 1] != 0 && (d[i] < 0) != (d[i + 1] < 0)) {
        roots.push_back(refine(grid[i], grid[i + 1], d[i], d[i + 1]));
        continue;
      }
      // Two nearby roots hiding between samples show up as a dip of |D|.
      if (i > 0 && i + 1 < grid.size() && d[i - 1] != 0 && d[i + 1] != 0 && (d[i - 1] < 0) == (d[i] < 0) &&
          (d[i + 1] < 0) == (d[i] < 0) && std::abs(d[i]) < std::abs(d[i - 1]) &&
          std::abs(d[i]) < std::abs(d[i + 1])) {
        const double sgn = d[i] > 0 ? 1.0 : -1.0;
        const auto [umin, fmin] = boost::math::tools::brent_find_minima(
            [&](double u) { return sgn * D(u); }, grid[i - 1], grid[i + 1], 26);
        const double local = std::max(std::abs(d[i - 1]), std::abs(d[i + 1]));
        if (fmin < 0) {
          roots.push_back(refine(grid[i - 1], umin, d[i - 1], sgn * fmin));
          roots.push_back(refine(umin, grid[i + 1], sgn * fmin, d[i + 1]));
        } else if (fmin <= 1e-10 * local) {
          throw BracketError("suspected double root near " + std::to_string(umin), umin);
        }
      }
    }
  }
  std::sort(roots.begin(), roots.end());
  std::vector<double> unique;
  for (double x : roots)
    if (unique.empty() || std::abs(x - unique.back()) > 1e-8 * (1 + std::abs(x))) unique.push_back(x);

  if (analytic) {
    // Only zeros of an analytic denominator are poles; branch points are not.
    std::vector<double> confirmed;
    for (std::size_t i = 0; i < unique.size(); ++i) {
      double half_w = 1e-2;
      if (i > 0) half_w = std::min(half_w, 0.25 * (unique[i] - unique[i - 1]));
      if (i + 1 < unique.size()) half_w = std::min(half_w, 0.25 * (unique[i + 1] - unique[i]));
      const double wn = detail::winding_number(problem, tau, unique[i], half_w, 1e-2);
      if (std::abs(wn - 1) < 0.2) confirmed.push_back(unique[i]);
      else if (std::abs(wn - std::round(wn)) < 0.2 && std::round(wn) >= 2)
        throw BracketError("multiple root near " + std::to_string(unique[i]), unique[i]);
    }
    unique = std::move(confirmed);
  }
  if (static_cast<int>(unique.size()) > max_count) unique.resize(static_cast<std::size_t>(max_count));
  return unique;
}

namespace detail {

inline double residue_jump(const SLProblem& problem, const BoundaryParam& tau, double s) {
  const double h = 1e-3 * (1 + std::abs(s));
  auto D = [&](double u) { return denominator_real(problem, tau, u); };
  const cplx dprime = (D(s - 2 * h) - 8.0 * D(s - h) + 8.0 * D(s + h) - D(s + 2 * h)) / (12 * h);
  const auto q = m_parts(problem, tau, s);
  return (-q.num / dprime).real();
}

inline double epsilon_jump(const SLProblem& problem, const BoundaryParam& tau, double s,
                           const std::vector<double>& eps) {
  std::vector<double> v(eps.size());
  for (std::size_t j = 0; j < eps.size(); ++j) v[j] = eps[j] * m_function(problem, tau, cplx(s, eps[j])).imag();
  const std::size_t n = eps.size();
  return neville_at_zero<double>(std::span<const double>(eps).subspan(n - 3, 3),
                                 std::span<const double>(v).subspan(n - 3, 3));
}

}  // namespace detail

/// Jump of the spectral function at a located simple pole s.
inline double point_mass(const SLProblem& problem, const BoundaryParam& tau, double s,
                         const std::vector<double>& eps_schedule = default_eps_schedule()) {
  if (eps_schedule.size() < 3) throw ConfigError("epsilon schedule needs at least three entries");
  const double a = detail::residue_jump(problem, tau, s);
  const double b = detail::epsilon_jump(problem, tau, s, eps_schedule);
  if (!(a > 0) || !(std::abs(a - b) <= 1e-3 * std::abs(a))) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "jump at %.12g: residue %.10g vs epsilon limit %.10g", s, a, b);
    throw CrossCheckError(buf);
  }
  return a;
}

/// One absolutely continuous cell: node u (the cell midpoint in sqrt|u|), density
/// rho(u) and the u-extent [lo, hi] whose length is the quadrature weight.
struct AcNode {
  double u = 0;
  double rho = 0;
  double lo = 0;
  double hi = 0;
  double weight() const { return hi - lo; }
};

struct SpectralFunction {
  std::vector<AcNode> ac;
  std::vector<PointMass> masses;
  double s_min = 0;
  double s_max = 0;
};

namespace detail {

/// Cells uniform in w = sgn(u) sqrt|u| over [l, r] (which must not straddle 0).
inline std::vector<AcNode> ac_cells(double l, double r, int count) {
  auto to_w = [](double u) { return u < 0 ? -std::sqrt(-u) : std::sqrt(u); };
  auto to_u = [](double w) { return w < 0 ? -w * w : w * w; };
  const double wl = to_w(l), wr = to_w(r);
  std::vector<AcNode> out;
  for (int i = 0; i < count; ++i) {
    const double w0 = wl + (wr - wl) * i / count;
    const double w1 = i + 1 == count ? wr : wl + (wr - wl) * (i + 1) / count;
    AcNode n;
    n.lo = i == 0 ? l : to_u(w0);
    n.hi = i + 1 == count ? r : to_u(w1);
    n.u = to_u(0.5 * (w0 + w1));
    out.push_back(n);
  }
  return out;
}

}  // namespace detail

/// Locates masses in the window, then samples the density on cells covering the
/// parts of the window where the boundary value of tau is non-real (the only
/// places a density can live). Nodes within 1e-3 (1 + |s_k|) of a mass are dropped.
inline SpectralFunction build_spectral_function(const SLProblem& problem, const BoundaryParam& tau, double s_min,
                                                double s_max, int ac_nodes,
                                                const std::vector<double>& eps_schedule = default_eps_schedule()) {
  if (!(s_min < s_max) || !std::isfinite(s_min) || !std::isfinite(s_max))
    throw ConfigError("spectral window must be finite with s_min < s_max");
  if (ac_nodes < 16) throw ConfigError("ac_nodes must be at least 16");
  SpectralFunction sf;
  sf.s_min = s_min;
  sf.s_max = s_max;
  const auto eig = find_eigenvalues(problem, tau, s_min, s_max);
  sf.masses.resize(eig.size());
  parallel_for(eig.size(), [&](std::size_t k) { sf.masses[k] = {eig[k], point_mass(problem, tau, eig[k], eps_schedule)}; });

  std::vector<RealInterval> support;
  for (auto [l, r] : tau.nonreal_intervals(s_min, s_max)) {
    if (l < 0 && r > 0) {
      support.emplace_back(l, 0.0);
      support.emplace_back(0.0, r);
    } else if (r > l) {
      support.emplace_back(l, r);
    }
  }
  double total_w = 0;
  for (auto [l, r] : support) total_w += std::abs(std::sqrt(std::abs(r)) - std::sqrt(std::abs(l)));
  for (auto [l, r] : support) {
    const double share = std::abs(std::sqrt(std::abs(r)) - std::sqrt(std::abs(l))) / total_w;
    const int count = std::max(4, static_cast<int>(std::lround(ac_nodes * share)));
    for (const auto& cell : detail::ac_cells(l, r, count)) {
      bool near_mass = false;
      for (const auto& pm : sf.masses)
        if (std::abs(cell.u - pm.s) < 1e-3 * (1 + std::abs(pm.s))) near_mass = true;
      if (!near_mass) sf.ac.push_back(cell);
    }
  }
  // Densities come from the exact boundary quotient; the epsilon limit is an
  // independent check wherever it can resolve the value.
  parallel_for(sf.ac.size(), [&](std::size_t j) {
    const double u = sf.ac[j].u;
    const double direct = detail::im_boundary_direct(problem, tau, u);
    const auto est = detail::im_boundary_value(problem, tau, u, eps_schedule, sf.masses);
    if (std::abs(est.value - direct) > 1e-3 * std::abs(direct) + est.noise) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "density at u = %.10g: boundary quotient %.10g vs epsilon limit %.10g", u,
                    direct / std::numbers::pi, est.value / std::numbers::pi);
      throw CrossCheckError(buf);
    }
    sf.ac[j].rho = detail::clamp_density(direct / std::numbers::pi, u);
  });
  return sf;
}

/// sigma(s) with sigma(0) = 0, left-continuous; negative for s < 0.
inline double stieltjes_cdf(const SpectralFunction& sf, double s) {
  if (!(s >= sf.s_min && s <= sf.s_max)) throw ConfigError("stieltjes_cdf: s outside the spectral window");
  double total = 0;
  const double lo = std::min(0.0, s), hi = std::max(0.0, s);
  const double sign = s >= 0 ? 1.0 : -1.0;
  for (const auto& n : sf.ac) {
    const double overlap = std::min(n.hi, hi) - std::max(n.lo, lo);
    if (overlap > 0) total += sign * n.rho * overlap;
  }
  for (const auto& pm : sf.masses) {
    if (s > 0 && pm.s >= 0 && pm.s < s) total += pm.jump;
    if (s < 0 && pm.s >= s && pm.s < 0) total -= pm.jump;
  }
  return total;
}

}  // namespace slspec
