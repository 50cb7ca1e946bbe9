#pragma once

// End-to-end checks on the free problem -y'' = lambda y on [0, 1] with
// y'(0) = 0, whose m-function for tau = sqrt(lambda) is known in closed form,
// and on its variant with a weight that vanishes on the middle third.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "slspec/config.hpp"
#include "slspec/nevanlinna.hpp"
#include "slspec/spectral.hpp"
#include "slspec/transform.hpp"

namespace slspec {

struct SuiteOptions {
  double ode_tol = 1e-12;
  /// Largest truncation of the mixed-expansion schedule.
  int k_max = 40;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0;
};

namespace closed_form {

/// Poles pi^2 (k - 1/4)^2 of the sqrt-boundary m-function, k = 1, 2, ...
inline double sqrt_pole(int k) { return std::numbers::pi * std::numbers::pi * (k - 0.25) * (k - 0.25); }

/// (sin r - cos r) / (r (cos r + sin r)), r = principal sqrt(lambda).
inline cplx sqrt_m(cplx lambda) {
  const cplx r = std::sqrt(lambda);
  return (std::sin(r) - std::cos(r)) / (r * (std::cos(r) + std::sin(r)));
}

/// 2 / (pi sqrt(-s) (e^{2 sqrt(-s)} + e^{-2 sqrt(-s)})) for s < 0.
inline double sqrt_density(double s) {
  const double r = std::sqrt(-s);
  return 2 / (std::numbers::pi * r * (std::exp(2 * r) + std::exp(-2 * r)));
}

/// First four eigenvalues of the middle-third problem with y'(0) = y'(1) = 0,
/// from transfer matrices evaluated in 40-digit arithmetic.
inline constexpr double middle_third_eigenvalues[4] = {0.0, 10.436918241555672241, 88.826439609804227570,
                                                       119.48220286623362730};

}  // namespace closed_form

namespace detail {

inline std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

inline QuadConfig suite_quad(const SuiteOptions& opt) {
  QuadConfig q;
  q.ode_tol = opt.ode_tol;
  return q;
}

inline std::vector<double> uniform_grid(double a, double b, int n) {
  std::vector<double> t;
  for (int i = 0; i < n; ++i) t.push_back(a + (b - a) * i / (n - 1));
  return t;
}

/// The K lowest eigenvalues, widening the search range until enough are found.
inline std::vector<double> lowest_eigenvalues(const SLProblem& problem, const BoundaryParam& tau, int K) {
  const double lo = search_floor(problem, tau);
  double hi = std::pow(std::numbers::pi * (K + 2) / phase_length(problem), 2) + 10;
  for (int attempt = 0; attempt < 8; ++attempt) {
    auto eig = find_eigenvalues(problem, tau, lo, hi, K);
    if (static_cast<int>(eig.size()) >= K) return eig;
    hi = 2 * hi + 10;
  }
  throw NumericalError("could not locate " + std::to_string(K) + " eigenvalues");
}

template <class Body>
CriterionResult run_criterion(int id, std::string title, Body&& body) {
  CriterionResult r;
  r.id = id;
  r.title = std::move(title);
  const auto start = std::chrono::steady_clock::now();
  try {
    body(r);
  } catch (const std::exception& e) {
    r.pass = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace detail

/// 1. Poles in [0, 1000] for tau = sqrt match pi^2 (k - 1/4)^2, k = 1..10, rel 1e-8, within 10 s.
inline CriterionResult criterion_eigenvalues(const SuiteOptions& opt) {
  return detail::run_criterion(1, "sqrt-boundary poles in [0, 1000]", [&](CriterionResult& r) {
    const auto pb = free_problem(detail::suite_quad(opt));
    const auto start = std::chrono::steady_clock::now();
    const auto eig = find_eigenvalues(pb, sqrt_param(), 0, 1000);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    double worst = 0;
    for (int k = 1; k <= 10 && k <= static_cast<int>(eig.size()); ++k)
      worst = std::max(worst, std::abs(eig[k - 1] - closed_form::sqrt_pole(k)) / closed_form::sqrt_pole(k));
    r.pass = eig.size() == 10 && worst <= 1e-8 && secs <= 10;
    r.detail = detail::fmt("count %.0f, worst rel err %.3e, %.2f s", static_cast<double>(eig.size()), worst, secs);
  });
}

/// 2. Jumps at the first three poles equal 2 (abs 1e-4); residue and epsilon routes agree to rel 1e-3.
inline CriterionResult criterion_jumps(const SuiteOptions& opt) {
  return detail::run_criterion(2, "jumps at the first three poles", [&](CriterionResult& r) {
    const auto pb = free_problem(detail::suite_quad(opt));
    const auto tau = sqrt_param();
    const auto eig = find_eigenvalues(pb, tau, 0, 100, 3);
    if (eig.size() != 3) throw NumericalError("expected three poles in [0, 100]");
    double worst_abs = 0, worst_cross = 0;
    for (double s : eig) {
      const double res = detail::residue_jump(pb, tau, s);
      const double lim = detail::epsilon_jump(pb, tau, s, default_eps_schedule());
      worst_cross = std::max(worst_cross, std::abs(res - lim) / std::abs(res));
      worst_abs = std::max(worst_abs, std::abs(point_mass(pb, tau, s) - 2.0));
    }
    r.pass = worst_abs <= 1e-4 && worst_cross <= 1e-3;
    r.detail = detail::fmt("worst |jump - 2| %.3e, worst residue/epsilon rel gap %.3e", worst_abs, worst_cross);
  });
}

/// 3. Density at s in {-0.25, -1, -4, -16} matches the closed form to rel 1e-5.
inline CriterionResult criterion_density(const SuiteOptions& opt) {
  return detail::run_criterion(3, "continuous density on s < 0", [&](CriterionResult& r) {
    const auto pb = free_problem(detail::suite_quad(opt));
    double worst = 0;
    for (double s : {-0.25, -1.0, -4.0, -16.0}) {
      const double exact = closed_form::sqrt_density(s);
      worst = std::max(worst, std::abs(spectral_density(pb, sqrt_param(), s) - exact) / exact);
    }
    r.pass = worst <= 1e-5;
    r.detail = detail::fmt("worst rel err %.3e", worst);
  });
}

/// 4. m agrees with its closed form at 100 seeded lambda, |Im| >= 0.1, |lambda| <= 100, rel 1e-8.
inline CriterionResult criterion_m_oracle(const SuiteOptions& opt) {
  return detail::run_criterion(4, "m-function against closed form", [&](CriterionResult& r) {
    const auto pb = free_problem(detail::suite_quad(opt));
    const auto tau = sqrt_param();
    std::mt19937_64 rng(20240501);
    std::uniform_real_distribution<double> coord(-100, 100);
    double worst = 0;
    int n = 0;
    while (n < 100) {
      const cplx l(coord(rng), coord(rng));
      if (std::abs(l) > 100 || std::abs(l.imag()) < 0.1) continue;
      const cplx exact = closed_form::sqrt_m(l);
      worst = std::max(worst, std::abs(m_function(pb, tau, l) - exact) / std::abs(exact));
      ++n;
    }
    r.pass = worst <= 1e-8;
    r.detail = detail::fmt("worst rel err %.3e over 100 points", worst);
  });
}

/// Mixed expansion schedule: masses k in {2, 5, 10, 20, 40} capped at k_max, ac window [-250 k, 0].
inline std::vector<Truncation> mixed_schedule(int k_max) {
  std::vector<Truncation> out;
  for (int k : {2, 5, 10, 20, 40})
    if (k < k_max) out.push_back({k, -250.0 * k, 0.0});
  out.push_back({k_max, -250.0 * k_max, 0.0});
  return out;
}

/// 5. Mixed expansion of y = (1 - t^2)^2 for tau = sqrt: sup error <= 1e-3 at the widest
/// truncation on 101 points, non-increasing along the schedule.
inline CriterionResult criterion_uniform_convergence(const SuiteOptions& opt) {
  return detail::run_criterion(5, "uniform convergence of the mixed expansion", [&](CriterionResult& r) {
    if (opt.k_max < 1) throw ConfigError("k_max must be positive");
    const auto pb = free_problem(detail::suite_quad(opt));
    const auto tau = sqrt_param();
    const auto schedule = mixed_schedule(opt.k_max);
    const double ac_lo = schedule.back().ac_lo;
    const double mass_hi = closed_form::sqrt_pole(opt.k_max) + 0.5 * (closed_form::sqrt_pole(opt.k_max + 1) - closed_form::sqrt_pole(opt.k_max));
    const int nodes = std::max(16, static_cast<int>(std::lround(4 * std::sqrt(-ac_lo))));
    const auto sf = build_spectral_function(pb, tau, ac_lo, mass_hi, nodes);
    RealFn y = [](double t) { return (1 - t * t) * (1 - t * t); };
    const auto yhat = fourier_transform(pb, y, sf);
    const auto rep = uniform_convergence_profile(pb, sf, yhat, y, schedule, detail::uniform_grid(0, 1, 101));
    bool monotone = true;
    std::string errs;
    for (std::size_t i = 0; i < rep.truncations.size(); ++i) {
      if (i > 0 && rep.truncations[i].sup_error > rep.truncations[i - 1].sup_error) monotone = false;
      errs += detail::fmt(i ? ", %.2e" : "%.2e", rep.truncations[i].sup_error);
    }
    const double final_err = rep.truncations.back().sup_error;
    r.pass = monotone && final_err <= 1e-3 && static_cast<int>(sf.masses.size()) >= opt.k_max;
    r.detail = "sup errors [" + errs + "]" + (monotone ? "" : " not monotone");
  });
}

/// 6. tau = constant 0: v_1..v_5 reproduce to 1e-6 (33 points); Parseval defect of t^2 at K = 50 <= 1e-4.
inline CriterionResult criterion_orthogonal_expansion(const SuiteOptions& opt) {
  return detail::run_criterion(6, "orthogonal-case expansion", [&](CriterionResult& r) {
    const auto pb = free_problem(detail::suite_quad(opt));
    const auto tau = BoundaryParam::constant(0);
    constexpr int K = 50;
    const auto eig = detail::lowest_eigenvalues(pb, tau, K);
    const auto sf = build_spectral_function(pb, tau, -10, eig.back() + 1, 16);
    if (static_cast<int>(sf.masses.size()) < K) throw NumericalError("spectral function has fewer than 50 masses");
    const Truncation all{K, 0, 0};
    const auto grid = detail::uniform_grid(0, 1, 33);
    double worst_rep = 0;
    for (int k = 0; k < 5; ++k) {
      const auto traj = propagate(pb, sf.masses[k].s, phi_initial(pb));
      const double norm = std::sqrt(delta_norm_sq(pb, [&](double t) { return traj.at(t).y.real(); }));
      RealFn v = [&](double t) { return traj.at(t).y.real() / norm; };
      const auto rec = inverse_transform_grid(pb, sf, fourier_transform(pb, v, sf), grid, all);
      for (std::size_t i = 0; i < grid.size(); ++i) worst_rep = std::max(worst_rep, std::abs(rec[i].value - v(grid[i])));
    }
    const double defect = parseval_defect(pb, sf, [](double t) { return t * t; }, all);
    r.pass = worst_rep <= 1e-6 && defect <= 1e-4;
    r.detail = detail::fmt("worst reproduction err %.3e, Parseval defect(t^2) %.3e", worst_rep, defect);
  });
}

/// 7. Middle-third weight, tau = constant 0: (a) first four eigenvalues vs transfer-matrix values,
/// rel 1e-6; (b) Parseval defect of y = 1 at K = 50 <= 1e-3; (c) functions living in the dead zone
/// transform to zero.
inline CriterionResult criterion_degenerate_weight(const SuiteOptions& opt) {
  return detail::run_criterion(7, "degenerate middle-third weight", [&](CriterionResult& r) {
    const auto pb = middle_third_problem(detail::suite_quad(opt));
    const auto tau = BoundaryParam::constant(0);
    const auto eig4 = find_eigenvalues(pb, tau, -1, 130, 4);
    double worst_eig = eig4.size() == 4 ? 0 : 1;
    for (std::size_t k = 0; k < eig4.size(); ++k) {
      const double o = closed_form::middle_third_eigenvalues[k];
      worst_eig = std::max(worst_eig, std::abs(eig4[k] - o) / std::max(1.0, std::abs(o)));
    }
    constexpr int K = 50;
    const auto eig = detail::lowest_eigenvalues(pb, tau, K);
    const auto sf = build_spectral_function(pb, tau, -10, eig.back() + 1, 16);
    const double defect = parseval_defect(pb, sf, [](double) { return 1.0; }, {K, 0, 0});
    RealFn dead = [](double t) {
      if (t <= 1.0 / 3 || t >= 2.0 / 3) return 0.0;
      const double s = std::sin(3 * std::numbers::pi * (t - 1.0 / 3));
      return 1 + s * s;
    };
    const auto hat = fourier_transform(pb, dead, sf);
    double worst_hat = hat.source_norm_sq;
    for (const auto& [s, v] : hat.mass_values) worst_hat = std::max(worst_hat, std::abs(v));
    const double quad_tol = pb.quad().abs_tol;
    r.pass = worst_eig <= 1e-6 && defect <= 1e-3 && worst_hat <= quad_tol;
    r.detail = detail::fmt("eig rel err %.3e, Parseval defect(1) %.3e, dead-zone transform %.3e", worst_eig, defect,
                           worst_hat);
  });
}

/// Built-in boundary parameters exercised by the invariant checks.
inline std::vector<BoundaryParam> builtin_params() {
  return {BoundaryParam::constant(0), BoundaryParam::constant(3), BoundaryParam::infinity(), sqrt_param(),
          identity_param(), mobius_param(2, 1, 1, 3)};
}

/// 8. Nevanlinna property of m at 50 seeded points for every built-in tau and both problems;
/// cumulative functions monotone on 200 points; Wronskian within 100 ode_tol.
inline CriterionResult criterion_invariants(const SuiteOptions& opt) {
  return detail::run_criterion(8, "Nevanlinna, monotonicity and Wronskian invariants", [&](CriterionResult& r) {
    const auto q = detail::suite_quad(opt);
    const std::vector<SLProblem> problems = {free_problem(q), middle_third_problem(q)};
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> re(-100, 100), im(0.1, 50);
    double worst_im = 0, worst_sym = 0;
    for (const auto& pb : problems)
      for (const auto& tau : builtin_params())
        for (int i = 0; i < 50; ++i) {
          const cplx l(re(rng), im(rng));
          const cplx up = m_function(pb, tau, l);
          const cplx down = m_function(pb, tau, std::conj(l));
          worst_im = std::max(worst_im, -up.imag());
          worst_sym = std::max(worst_sym, std::abs(down - std::conj(up)) / std::max(1.0, std::abs(up)));
        }

    bool monotone = true;
    const std::vector<std::pair<BoundaryParam, std::pair<double, double>>> cases = {
        {sqrt_param(), {-50, 100}}, {BoundaryParam::constant(0), {-10, 50}}};
    for (const auto& pb : problems)
      for (const auto& [tau, win] : cases) {
        const auto sf = build_spectral_function(pb, tau, win.first, win.second, 64);
        double prev = -std::numeric_limits<double>::infinity();
        for (double s : detail::uniform_grid(win.first, win.second, 200)) {
          const double v = stieltjes_cdf(sf, s);
          if (v < prev) monotone = false;
          prev = v;
        }
      }

    double worst_w = 0;
    std::uniform_real_distribution<double> box_re(-20, 200), box_im(-5, 5);
    for (const auto& pb : problems)
      for (int i = 0; i < 20; ++i) {
        const cplx l(box_re(rng), box_im(rng));
        for (double t : detail::uniform_grid(0, 1, 50)) worst_w = std::max(worst_w, std::abs(wronskian(pb, l, t) - 1.0));
      }
    r.pass = worst_im <= 1e-8 && worst_sym <= 1e-8 && monotone && worst_w <= 100 * opt.ode_tol;
    r.detail = detail::fmt("Im m violation %.2e, symmetry %.2e, Wronskian drift %.2e", worst_im, worst_sym, worst_w) +
               (monotone ? "" : ", cdf not monotone");
  });
}

/// 9. Classification: lambda -> bc1, constant theta -> bc2 (D = theta), sqrt -> bc3, infinity -> bc1.
inline CriterionResult criterion_classifier(const SuiteOptions&) {
  return detail::run_criterion(9, "boundary-condition classifier truth table", [&](CriterionResult& r) {
    const double theta = 2.5;
    const auto c1 = classify_bc(identity_param());
    const auto c2 = classify_bc(BoundaryParam::constant(theta));
    const auto c3 = classify_bc(sqrt_param());
    const auto c4 = classify_bc(BoundaryParam::infinity());
    r.pass = c1.label == BCClass::Label::bc1 && c2.label == BCClass::Label::bc2 && c2.d_tau == theta &&
             c3.label == BCClass::Label::bc3 && c4.label == BCClass::Label::bc1;
    r.detail = "lambda->" + c1.name() + ", constant:2.5->" + c2.name() +
               (c2.d_tau ? detail::fmt("(D=%.17g)", *c2.d_tau) : "") + ", sqrt->" + c3.name() + ", infinity->" +
               c4.name();
  });
}

inline std::vector<std::function<CriterionResult(const SuiteOptions&)>> all_criteria() {
  return {criterion_eigenvalues,          criterion_jumps,          criterion_density,
          criterion_m_oracle,             criterion_uniform_convergence, criterion_orthogonal_expansion,
          criterion_degenerate_weight,    criterion_invariants,     criterion_classifier};
}

inline std::string format_result(const CriterionResult& r) {
  char head[160];
  std::snprintf(head, sizeof head, "[%s] criterion %d: %s (%.2f s) - ", r.pass ? "PASS" : "FAIL", r.id, r.title.c_str(),
                r.seconds);
  return head + r.detail;
}

}  // namespace slspec
